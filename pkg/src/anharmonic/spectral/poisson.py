"""Symmetric solutions of the two lattice Poisson equations.

The primary unknown h_n solves  L# h_n = gk^2 grad f (x) delta  on the n-torus,
where  L# = sqrt(n) A_n + gk n^{-1/2} Lap_n  and gk = 1 + kappa_n gamma_n.
Its Fourier coefficients are (gk^2 / 2 sqrt n) Theta(u/n, v/n) F_n(f)(u+v).
The secondary unknown v_n solves  L# v_n = 2 n^{-1/2} Dtilde_n h_n.

Note on operator placement: the drift/noise generator splits with the factor
gk multiplying the Laplacian part; the companion operator with gk on the A_n
part has the same symbol at gamma = 0 and is exposed for comparison.
"""

from __future__ import annotations

import numpy as np

from ..equilibrium import kappa
from ..fields import TestFunction, grid_coordinates
from .ops import (
    a_op,
    dtilde_op,
    fourier_grid_1d,
    grad_tensor_delta,
    lambda_omega_theta,
    lap2,
)
from .residues import residue_functions

__all__ = [
    "gk_of",
    "f_samples",
    "f_hat_grid",
    "poisson_h_hat",
    "h_hat_grid",
    "h_grid",
    "w_from_h",
    "v_hat_grid",
    "v_grid",
    "apply_ln_sharp",
    "apply_ln_literal",
    "defect_report",
]


def gk_of(gamma_n: float, kappa_n: float | None = None) -> float:
    """The factor 1 + kappa_n gamma_n."""
    if kappa_n is None:
        kappa_n = kappa(gamma_n) if gamma_n != 0.0 else 3.0
    return 1.0 + kappa_n * gamma_n


def f_samples(f: TestFunction, n: int) -> np.ndarray:
    """Samples of f at the signed mesh points, indexed by site 0..n-1."""
    return f.periodic(grid_coordinates(n))


def f_hat_grid(f: TestFunction, n: int) -> np.ndarray:
    """F_n(f) at all integer frequencies (index = frequency mod n)."""
    return fourier_grid_1d(f_samples(f, n))


def _freq_mesh(n: int):
    u = np.arange(n)
    return np.meshgrid(u, u, indexing="ij")


def poisson_h_hat(u: int, v: int, n: int, f: TestFunction, gk: float) -> complex:
    """Single Fourier coefficient of h_n."""
    fh = f_hat_grid(f, n)
    _, _, theta = lambda_omega_theta(u / n, v / n, gk)
    return gk * gk / (2.0 * np.sqrt(n)) * theta * fh[(u + v) % n]


def h_hat_grid(n: int, f: TestFunction, gk: float) -> np.ndarray:
    """All Fourier coefficients of h_n on the n x n integer frequency grid."""
    if n & (n - 1):
        raise ValueError("n must be a power of two for the FFT path")
    fh = f_hat_grid(f, n)
    uu, vv = _freq_mesh(n)
    _, _, theta = lambda_omega_theta(uu / n, vv / n, gk)
    return gk * gk / (2.0 * np.sqrt(n)) * theta * fh[(uu + vv) % n]


def h_grid(n: int, f: TestFunction, gk: float) -> np.ndarray:
    """Real-space h_n(x/n, y/n) on the periodic grid (real symmetric array)."""
    return np.fft.fft2(h_hat_grid(n, f, gk)).real


def w_from_h(h: np.ndarray) -> np.ndarray:
    """w_n(x/n) = h_n(x/n, (x+1)/n) - h_n(x/n, x/n)."""
    n = h.shape[0]
    idx = np.arange(n)
    return h[idx, (idx + 1) % n] - h[idx, idx]


def v_hat_grid(
    n: int,
    f: TestFunction,
    gk: float,
    *,
    use_closed_form_w: bool = False,
    h: np.ndarray | None = None,
) -> np.ndarray:
    """Fourier coefficients of v_n.

    By default the right-hand side uses the exact lattice transform of w_n
    (so that L# v_n = 2 n^{-1/2} Dtilde_n h_n holds to machine precision);
    with ``use_closed_form_w`` the contour-integral substitution
    F_n(w_n)(xi) = -(sqrt n / 2) L(xi/n) F_n(f)(xi) is used instead.
    """
    if h is None:
        h = h_grid(n, f, gk)
    uu, vv = _freq_mesh(n)
    lam, omega, _ = lambda_omega_theta(uu / n, vv / n, gk)
    denom = gk * lam - 1j * omega
    if use_closed_form_w:
        fh = f_hat_grid(f, n)
        y = np.arange(n, dtype=float) / n
        y[0] = 1.0  # placeholder; L(0) = 0 is enforced below
        l_ring = residue_functions(y, gk)["L"]
        l_ring[0] = 0.0
        w_hat = -0.5 * np.sqrt(n) * l_ring * fh
    else:
        w_hat = fourier_grid_1d(w_from_h(h))
    num = (np.exp(2j * np.pi * uu / n) + np.exp(2j * np.pi * vv / n)) * w_hat[(uu + vv) % n]
    out = np.zeros((n, n), dtype=complex)
    mask = denom != 0
    out[mask] = -2.0 / n * num[mask] / denom[mask]
    return out


def v_grid(n: int, f: TestFunction, gk: float, **kwargs) -> np.ndarray:
    """Real-space v_n on the periodic grid."""
    return np.fft.fft2(v_hat_grid(n, f, gk, **kwargs)).real


def apply_ln_sharp(h: np.ndarray, gk: float) -> np.ndarray:
    """sqrt(n) A_n h + gk n^{-1/2} Lap_n h."""
    n = h.shape[0]
    return np.sqrt(n) * a_op(h) + gk / np.sqrt(n) * lap2(h)


def apply_ln_literal(h: np.ndarray, gk: float) -> np.ndarray:
    """sqrt(n) gk A_n h + n^{-1/2} Lap_n h (gk on the antisymmetric part)."""
    n = h.shape[0]
    return np.sqrt(n) * gk * a_op(h) + lap2(h) / np.sqrt(n)


def defect_report(n: int, f: TestFunction, gamma_n: float,
                  kappa_n: float | None = None) -> dict:
    """Relative l2 defects of the reconstructed Poisson solutions.

    Reports the defect of h_n under both operator placements, the symmetry
    error of h_n, and the defect of v_n against 2 n^{-1/2} Dtilde_n h_n.
    """
    gk = gk_of(gamma_n, kappa_n)
    h = h_grid(n, f, gk)
    rhs = gk * gk * grad_tensor_delta(f_samples(f, n))
    scale = np.linalg.norm(rhs)
    defect_sharp = np.linalg.norm(apply_ln_sharp(h, gk) - rhs) / scale
    defect_literal = np.linalg.norm(apply_ln_literal(h, gk) - rhs) / scale
    symmetry = np.max(np.abs(h - h.T)) / np.max(np.abs(h))
    v = v_grid(n, f, gk, h=h)
    rhs_v = 2.0 / np.sqrt(n) * dtilde_op(h)
    defect_v = np.linalg.norm(apply_ln_sharp(v, gk) - rhs_v) / np.linalg.norm(rhs_v)
    return {
        "gk": gk,
        "defect_sharp": float(defect_sharp),
        "defect_literal": float(defect_literal),
        "defect_v": float(defect_v),
        "symmetry": float(symmetry),
    }
