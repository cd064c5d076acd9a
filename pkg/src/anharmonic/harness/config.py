"""Experiment configuration: defaults per experiment plus flat key=value files.

Config files use :mod:`configparser` syntax with one section per experiment,
e.g.::

    [theorem1]
    n = 256
    a = 1.0
    gamma = 1e-2
    t_grid = 0.05, 0.1, 0.15
    replicas = 10000

Values given on the command line (``--seed``, ``--threads``) override the
file.  Unknown keys are a configuration error.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str
    n: int = 256
    a: float = 1.0
    b: float = 0.0           # coupling schedule exponent: gamma_n = gamma * n**-b
    gamma: float = 1e-2      # schedule prefactor (the value itself when b == 0)
    beta: float = 1.0
    t_grid: tuple = (0.0,)
    replicas: int = 100
    seed: int = 0
    threads: int = 1
    centers: int = 8
    width: float = 0.02
    kind: str = "volume"     # site density entering both fields
    translation_average: bool = True   # average the estimator over torus shifts
    burn: float = 0.0
    out: str = "."
    fmt: str = "csv"

    @property
    def gamma_n(self) -> float:
        return float(self.gamma) * float(self.n) ** (-float(self.b))

    def validate(self) -> "ExperimentConfig":
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"n must be a power of two >= 2, got {self.n}")
        if self.experiment.startswith("theorem") and self.replicas < 100:
            raise ConfigError(
                f"theorem experiments need replicas >= 100, got {self.replicas}")
        if self.replicas < 1:
            raise ConfigError(f"replicas must be positive, got {self.replicas}")
        if not (0 < self.width <= 0.25):
            raise ConfigError(f"width must lie in (0, 0.25], got {self.width}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be non-negative, got {self.gamma}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer")
        if any(t < 0 for t in self.t_grid):
            raise ConfigError("t_grid entries must be non-negative")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt}")
        return self


DEFAULTS = {
    "equilibrium": ExperimentConfig("equilibrium", n=2, t_grid=()),
    "hydro": ExperimentConfig("hydro", n=2, gamma=0.0, t_grid=()),
    "simulate": ExperimentConfig("simulate", n=256, a=1.0, gamma=1e-2,
                                 t_grid=(1.0,), replicas=4),
    "theorem1": ExperimentConfig("theorem1", n=256, a=1.0, b=0.0, gamma=1e-2,
                                 t_grid=(0.05, 0.1, 0.15), replicas=10_000,
                                 centers=17, width=0.25, kind="volume",
                                 translation_average=False),
    "theorem2": ExperimentConfig("theorem2", n=128, a=2.0, b=1.0, gamma=1.0,
                                 t_grid=(0.25,), replicas=5_000,
                                 centers=8, width=0.1, kind="volume"),
    "theorem3": ExperimentConfig("theorem3", n=128, a=1.5, b=0.5, gamma=1.0,
                                 t_grid=(0.2,), replicas=5_000,
                                 centers=17, width=0.05, kind="energy"),
    "spectral-suite": ExperimentConfig("spectral-suite", n=256, gamma=1e-2,
                                       t_grid=()),
    "identity-suite": ExperimentConfig("identity-suite", n=32, gamma=0.05,
                                       replicas=100, t_grid=()),
    "chaos-suite": ExperimentConfig("chaos-suite", n=256, gamma=0.1,
                                    t_grid=()),
}

_FLOAT_KEYS = {"a", "b", "gamma", "beta", "width", "burn"}
_INT_KEYS = {"n", "replicas", "seed", "threads", "centers"}
_STR_KEYS = {"kind", "out", "fmt"}
_BOOL_KEYS = {"translation_average"}


def _parse_t_grid(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad t_grid: {text!r}") from exc


def load_config(experiment: str, path: str | None = None,
                overrides: dict | None = None) -> ExperimentConfig:
    """Build the configuration for ``experiment``.

    Starts from the built-in defaults, applies the matching section of the
    config file at ``path`` (if any), then applies ``overrides`` (command-line
    flags).
    """
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = replace(DEFAULTS[experiment])

    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
        if parser.has_section(experiment):
            for key, raw in parser.items(experiment):
                try:
                    if key in _FLOAT_KEYS:
                        setattr(cfg, key, float(raw))
                    elif key in _INT_KEYS:
                        setattr(cfg, key, int(raw, 0))
                    elif key in _STR_KEYS:
                        setattr(cfg, key, raw.strip())
                    elif key in _BOOL_KEYS:
                        setattr(cfg, key, parser.getboolean(experiment, key))
                    elif key == "t_grid":
                        cfg.t_grid = _parse_t_grid(raw)
                    else:
                        raise ConfigError(
                            f"unknown key {key!r} in section [{experiment}]")
                except ConfigError:
                    raise
                except ValueError as exc:
                    raise ConfigError(
                        f"bad value for {key!r}: {raw!r}") from exc

    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg.validate()
