"""Run reports: row schema, pass/fail checks and CSV/JSON serialization.

Every experiment produces a :class:`RunReport` with one row per
(time, probe center) pair.  The row schema is fixed::

    experiment,n,a,b,gamma_n,beta,t,f_center,estimate,stderr,reference,zscore,replicas,seed

Floating-point fields are serialized with 17 significant digits so output is
reproducible bit-for-bit; integer fields are printed as integers.  CSV output
ends with a trailing newline.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

COLUMNS = ("experiment", "n", "a", "b", "gamma_n", "beta", "t", "f_center",
           "estimate", "stderr", "reference", "zscore", "replicas", "seed")
_INT_COLUMNS = {"n", "replicas", "seed"}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class RunReport:
    experiment: str
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add_row(self, cfg, t, f_center, estimate, stderr, reference, zscore):
        self.rows.append({
            "experiment": self.experiment,
            "n": int(cfg.n),
            "a": float(cfg.a),
            "b": float(cfg.b),
            "gamma_n": float(cfg.gamma_n),
            "beta": float(cfg.beta),
            "t": float(t),
            "f_center": float(f_center),
            "estimate": float(estimate),
            "stderr": float(stderr),
            "reference": float(reference),
            "zscore": float(zscore),
            "replicas": int(cfg.replicas),
            "seed": int(cfg.seed),
        })

    def add_check(self, name: str, passed: bool, detail: str = ""):
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def has_nan(self) -> bool:
        return any(
            isinstance(v, float) and not math.isfinite(v)
            for row in self.rows for v in row.values())


def _fmt(key: str, value) -> str:
    if key == "experiment":
        return str(value)
    if key in _INT_COLUMNS:
        return "%d" % int(value)
    return "%.17g" % float(value)


def to_csv(report: RunReport) -> str:
    lines = [",".join(COLUMNS)]
    for row in report.rows:
        lines.append(",".join(_fmt(k, row[k]) for k in COLUMNS))
    return "\n".join(lines) + "\n"


def to_json(report: RunReport) -> str:
    payload = {
        "experiment": report.experiment,
        "rows": [
            {k: (row[k] if k == "experiment" else
                 int(row[k]) if k in _INT_COLUMNS else float(_fmt(k, row[k])))
             for k in COLUMNS}
            for row in report.rows
        ],
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                   for c in report.checks],
        "meta": report.meta,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit(report: RunReport, out_dir: str, fmt: str = "csv") -> str:
    """Write the report to ``out_dir`` and return the file path."""
    os.makedirs(out_dir, exist_ok=True)
    ext = "csv" if fmt == "csv" else "json"
    path = os.path.join(out_dir, f"{report.experiment}.{ext}")
    text = to_csv(report) if fmt == "csv" else to_json(report)
    with open(path, "w") as fh:
        fh.write(text)
    return path
