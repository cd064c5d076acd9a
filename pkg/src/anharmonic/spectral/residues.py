"""Closed-form contour-integral values I..O, the kernel weight W and the
comparison between the discrete symbol kernel G_n and its macroscopic limit
G_0(v) = |pi v|^{3/2} (1 + i sgn v) / 2.

Conventions: w = e^{2 i pi y}, gk = 1 + kappa_n gamma_n >= 1, and all square
roots are principal (non-negative real part).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ..equilibrium import kappa
from .ops import lambda_omega_theta

__all__ = [
    "residue_algebra",
    "residue_functions",
    "residue_quadrature",
    "w_weight",
    "g0",
    "g0_gn",
]

_MIN_ABS_Y = 1e-6


def residue_algebra(y, gk: float) -> dict:
    """The scalars w, a(w), delta(w) and the roots z_-, z_+ of P_w."""
    y = np.asarray(y, dtype=float)
    kg = gk - 1.0
    w = np.exp(2j * np.pi * y)
    a = 2.0 + kg * (1.0 + np.conj(w))
    delta = 4.0 * gk * (1.0 - w) + kg * kg * (2.0 - w - np.conj(w))
    sq = np.sqrt(delta)
    z_minus = (2.0 * gk - sq) / a
    z_plus = (2.0 * gk + sq) / a
    return {
        "w": w,
        "a": a,
        "delta": delta,
        "sqrt_delta": sq,
        "z_minus": z_minus,
        "z_plus": z_plus,
        # w a^2 + delta = 4 gk^2 identically
        "star_defect": np.abs(w * a * a + delta - 4.0 * gk * gk),
    }


def residue_functions(y, gk: float) -> dict:
    """Closed forms of the seven contour integrals at frequency y.

    At y = 0 the functions I, J, K, L, N vanish; M and O diverge there and a
    ValueError is raised if y contains 0.
    """
    y_arr = np.asarray(y, dtype=float)
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    if np.any(y_arr == 0.0):
        # I, J, K, L, N all vanish as y -> 0, but M and O have no finite limit.
        raise ValueError("residue_functions requires y != 0 (M, O diverge at 0)")
    alg = residue_algebra(y_arr, gk)
    w, a, sq = alg["w"], alg["a"], alg["sqrt_delta"]
    one_minus_w = 1.0 - w
    i_val = one_minus_w / (w * a) * (1.0 - 2.0 * gk / sq)
    j_val = 2.0 * gk * one_minus_w / (w * a) * i_val
    k_val = 2.0 * j_val
    l_val = i_val * (1.0 - 2.0 * gk / (w * a))
    m_val = j_val / np.abs(w - 1.0) ** 2
    n_val = w / one_minus_w * l_val
    o_val = w / (w - 1.0) * i_val
    out = {"I": i_val, "J": j_val, "K": k_val, "L": l_val, "M": m_val,
           "N": n_val, "O": o_val}
    if scalar:
        out = {key: complex(val[0]) for key, val in out.items()}
    return out


def _complex_quad(func, lo: float, hi: float) -> complex:
    re = quad(lambda x: func(x).real, lo, hi, limit=400, epsabs=1e-12, epsrel=1e-12)[0]
    im = quad(lambda x: func(x).imag, lo, hi, limit=400, epsabs=1e-12, epsrel=1e-12)[0]
    return re + 1j * im


def residue_quadrature(y: float, gk: float) -> dict:
    """Direct quadrature of the defining integrals (oracle for the closed forms)."""
    if y == 0.0:
        raise ValueError("quadrature oracle requires y != 0")

    def theta(x):
        return lambda_omega_theta(y - x, x, gk)[2]

    w = np.exp(2j * np.pi * y)
    i_val = _complex_quad(theta, -0.5, 0.5)
    j_val = (1.0 - w) * _complex_quad(lambda x: theta(x) * np.exp(-2j * np.pi * x), -0.5, 0.5)

    def omega_theta(x):
        lam, om, th = lambda_omega_theta(y - x, x, gk)
        return 1j * om * th

    k_val = -_complex_quad(omega_theta, -0.5, 0.5)
    l_val = _complex_quad(lambda x: (1.0 - np.exp(-2j * np.pi * x)) * theta(x), -0.5, 0.5)
    pref = 1.0 / (1.0 - np.conj(w))
    m_val = pref * _complex_quad(lambda x: np.exp(-2j * np.pi * x) * theta(x), -0.5, 0.5)
    n_val = pref * _complex_quad(lambda x: (np.exp(-2j * np.pi * x) - 1.0) * theta(x), -0.5, 0.5)
    o_val = pref * i_val
    return {"I": i_val, "J": j_val, "K": k_val, "L": l_val, "M": m_val,
            "N": n_val, "O": o_val}


def w_weight(y: float, gk: float = 1.0) -> float:
    """W(y) = integral of 1 / (Lambda^2 + Omega^2)(y - x, x) over x in [-1/2, 1/2]."""
    if abs(y) < _MIN_ABS_Y:
        raise ValueError("W(y) is evaluated only for |y| >= 1e-6")

    def integrand(x):
        lam, om, _ = lambda_omega_theta(y - x, x, gk)
        return 1.0 / (lam * lam + om * om)

    val, _ = quad(integrand, -0.5, 0.5, limit=400, epsrel=1e-10)
    return val


def g0(xi):
    """G_0(v) = |pi v|^{3/2} (1 + i sgn v) / 2."""
    xi = np.asarray(xi, dtype=float)
    out = 0.5 * np.abs(np.pi * xi) ** 1.5 * (1.0 + 1j * np.sign(xi))
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GnComparison:
    g0_value: complex
    gn_value: complex
    normalized_error: float


def g0_gn(xi: float, n: int, gamma_n: float, kappa_n: float | None = None) -> GnComparison:
    """Compare n^{3/2} G_n(xi/n) with G_0(xi).

    G_n(y) = (gk^2 / 4) K(y).  The normalized error divides the gap by
    gamma_n |xi|^{3/2} + xi^2 / sqrt(n), the scale at which the two kernels
    are expected to agree.
    """
    if kappa_n is None:
        kappa_n = kappa(gamma_n) if gamma_n != 0.0 else 3.0
    gk = 1.0 + kappa_n * gamma_n
    g0_val = g0(xi)
    if xi == 0.0:
        return GnComparison(g0_val, 0.0 + 0.0j, 0.0)
    k_val = residue_functions(xi / n, gk)["K"]
    gn_val = 0.25 * gk * gk * k_val
    gap = abs(n ** 1.5 * gn_val - g0_val)
    scale = gamma_n * abs(xi) ** 1.5 + xi * xi / np.sqrt(n)
    return GnComparison(g0_val, gn_val, gap / scale if scale > 0 else np.inf)
