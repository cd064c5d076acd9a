"""Macroscopic reference semigroups: transport at speed -2, heat flow, and
the skewed 3/2-stable flow, all under the e^{+2 i pi xi u} transform
convention (so the inverse transform carries e^{-2 i pi xi u}).

Two discretizations are provided:

* a line discretization that periodizes with a wide period ``span`` (used for
  oracle comparisons against real-space quadrature of the fractional
  operators), and
* a torus discretization of period one on the n-point mesh (used as the
  reference profile for lattice experiments, where periodization is wanted).
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from ..fields import TestFunction, grid_coordinates
from .residues import g0

__all__ = [
    "psi_levy",
    "multiplier",
    "line_multiplier_apply",
    "semigroup_apply",
    "torus_multiplier_apply",
    "torus_semigroup",
    "l_operator_torus",
    "fractional_laplacian_quadrature",
    "l_operator_quadrature",
]

KINDS = ("transport", "heat", "levy32")


def psi_levy(xi):
    """psi(xi) = -2 |pi xi|^{3/2} (1 + i sgn xi), i.e. -4 G_0(xi)."""
    return -4.0 * g0(xi)


def multiplier(kind: str, t: float, xi: np.ndarray) -> np.ndarray:
    """Fourier multiplier of the time-t semigroup at frequency xi."""
    xi = np.asarray(xi, dtype=float)
    if kind == "transport":
        # generator -2 d/du acting on test functions: f -> f(. - 2t)
        return np.exp(4j * np.pi * xi * t)
    if kind == "heat":
        return np.exp(-4.0 * np.pi**2 * xi**2 * t)
    if kind == "levy32":
        return np.exp(t * psi_levy(xi))
    raise ValueError(f"unknown semigroup kind: {kind!r}")


def line_multiplier_apply(f: TestFunction, mult, span: float, npts: int):
    """Apply a paper-convention multiplier on a periodized line grid.

    Returns (u, samples) with u = -span/2 + j span/npts.  The frequency grid
    has spacing 1/span, so the result equals the span-periodization of the
    exact line evaluation (Poisson summation); choose span large enough that
    the kernel tails at distance span/2 are negligible.
    """
    u = -0.5 * span + span * np.arange(npts) / npts
    xi = np.arange(npts)
    xi = ((xi + npts // 2) % npts) - npts // 2  # signed integer index
    freq = xi / span
    # F(f)(k/span) = (span/npts) sum_j f(u_j) e^{2 i pi u_j k / span}
    #             = span * (-1)^k * ifft(f)(k)
    fh = span * (-1.0) ** (xi % 2) * np.fft.ifft(f(u))
    out = np.fft.fft((-1.0) ** (xi % 2) * mult(freq) * fh) / span
    return u, out.real


def semigroup_apply(kind: str, t: float, f: TestFunction,
                    span: float | None = None, npts: int = 2**15):
    """Evolve the test function f for time t; returns (u_grid, samples).

    The span is validated against eight times the kernel spread (aliasing
    guard).  Transport is realized as an exact shift of the bump.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if kind == "transport":
        spread = 2.0 * t
    elif kind == "heat":
        spread = np.sqrt(2.0 * t)
    elif kind == "levy32":
        spread = (2.0 * t) ** (2.0 / 3.0)
    else:
        raise ValueError(f"unknown semigroup kind: {kind!r}")
    if span is None:
        span = max(16.0, 8.0 * (spread + 2.0 * f.width + abs(f.center)))
    if span < 8.0 * spread:
        raise ValueError("grid span must be at least 8x the kernel spread")
    if kind == "transport":
        u = -0.5 * span + span * np.arange(npts) / npts
        return u, f.shifted(2.0 * t)(u)
    return line_multiplier_apply(f, lambda xi: multiplier(kind, t, xi), span, npts)


def torus_multiplier_apply(samples: np.ndarray, mult) -> np.ndarray:
    """Apply a paper-convention multiplier on the unit torus (integer modes)."""
    n = samples.shape[0]
    xi = ((np.arange(n) + n // 2) % n) - n // 2
    fh = np.fft.ifft(samples)
    return np.fft.fft(mult(xi.astype(float)) * fh).real


def torus_semigroup(kind: str, t: float, f: TestFunction, n: int) -> np.ndarray:
    """Time-t evolution of f on the unit torus, sampled at the signed mesh."""
    coords = grid_coordinates(n)
    if kind == "transport":
        return f.shifted(2.0 * t).periodic(coords)
    return torus_multiplier_apply(f.periodic(coords), lambda xi: multiplier(kind, t, xi))


def l_operator_torus(f: TestFunction, n: int, oversample: int = 8) -> np.ndarray:
    """The generator of the levy32 flow applied to f, periodized on the torus.

    Computed on an oversampled mesh (to resolve the |xi|^{3/2} growth of the
    multiplier against the tail of F(f)) and decimated back to the n-grid.
    """
    m = oversample * n
    coords = grid_coordinates(m)
    fh = np.fft.ifft(f.periodic(coords))
    xi = (((np.arange(m) + m // 2) % m) - m // 2).astype(float)
    lf = np.fft.fft(psi_levy(xi) * fh).real
    return lf[::oversample]


def _frac_const(s: float) -> float:
    return 4.0**s * gamma_fn(0.5 + s) / (np.sqrt(np.pi) * abs(gamma_fn(-s)))


def fractional_laplacian_quadrature(g, u: float, s: float) -> float:
    """(-Lap)^s g(u) for s in (0,1) via the symmetric hypersingular integral."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    c = _frac_const(s)

    def integrand(r):
        return (2.0 * g(u) - g(u + r) - g(u - r)) / r ** (1.0 + 2.0 * s)

    # The integral over r in (0, inf) of the symmetric difference equals the
    # full two-sided singular integral.  Below r0 the symmetric difference is
    # -g''(u) r^2 + O(r^4) and cancellation makes quadrature noisy, so that
    # piece is integrated in closed form.
    r0 = 1e-3
    h = 1e-4
    g2 = (g(u + h) + g(u - h) - 2.0 * g(u)) / (h * h)
    val = -g2 * r0 ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
    val += quad(integrand, r0, 1.0, limit=400, epsabs=1e-12, epsrel=1e-11)[0]
    val += quad(integrand, 1.0, 50.0, limit=400, epsabs=1e-12, epsrel=1e-11)[0]
    val += quad(integrand, 50.0, np.inf, limit=400, epsabs=1e-12, epsrel=1e-11)[0]
    return c * val


def l_operator_quadrature(g, g_prime, u: float) -> float:
    """L g(u) = -(1/sqrt 2) [ (-Lap)^{3/4} g - (-Lap)^{1/4} g' ](u).

    The gradient commutes with the fractional Laplacian, so the second term
    is evaluated on the analytic derivative g'.
    """
    term1 = fractional_laplacian_quadrature(g, u, 0.75)
    term2 = fractional_laplacian_quadrature(g_prime, u, 0.25)
    return -(term1 - term2) / np.sqrt(2.0)
