"""Model parameters for the weakly anharmonic chain with exchange noise.

The single-site potential is e(u) = u^2/2 + gamma*u^4/4 and the equilibrium
product measure has one-site density proportional to

    exp(-beta * e(u) - lam * u),      lam = tau * beta.

The anharmonic coupling may either be fixed (``gamma``) or tied to the lattice
size through the scaling gamma_n = coupling * n**(-b).
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of the chain.

    n       -- number of lattice sites (periodic chain); 0 means "no lattice"
               (pure single-site thermodynamics).
    beta    -- inverse temperature, > 0.
    tau     -- tension (conjugate to the volume Sum omega_x).
    gamma   -- anharmonic coupling >= 0.  If ``b`` is set, gamma is derived
               from ``coupling * n**(-b)`` at construction time instead.
    a       -- time-acceleration exponent: the generator is sped up by n^a.
    """

    n: int = 0
    beta: float = 1.0
    tau: float = 0.0
    gamma: float = 0.0
    a: float = 0.0

    def __post_init__(self) -> None:
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")

    @property
    def lam(self) -> float:
        """Linear tilt of the one-site density, lam = tau*beta."""
        return self.tau * self.beta

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


def gamma_of_n(n: int, coupling: float, b: float) -> float:
    """Size-dependent coupling gamma_n = coupling * n**(-b)."""
    if n <= 0:
        raise ValueError("n must be positive to form gamma_n")
    return coupling * float(n) ** (-b)
