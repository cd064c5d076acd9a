"""Diagnostic suites on the Poisson solutions: the diagonal-derivative limit,
the nine scaling exponents, the band-structure factorizations of the
fluctuation kernels, and the frequency-integral bound used with them.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from ..fields import TestFunction
from .ops import d_op, fourier_grid_2d, lambda_omega_theta
from .poisson import (f_hat_grid, f_samples, gk_of, h_grid, v_grid,
                      v_hat_grid, w_from_h)
from .residues import g0, residue_functions

__all__ = [
    "l_f_reference",
    "dn_hn_vs_lf",
    "scaling_suite",
    "phi_hat_suite",
    "psi_hat_suite",
    "u_n_bound_check",
    "cov_identity_check",
]


def l_f_reference(f: TestFunction, n: int, oversample: int = 8) -> np.ndarray:
    """-(1/4) L f periodized on the unit torus, sampled at the n mesh points.

    q(u) = int e^{-2 i pi u v} G_0(v) F(f)(v) dv; its period-one periodization
    is the integer-frequency mode sum (Poisson summation), evaluated here on
    an oversampled grid so the |v|^{3/2} tail of the multiplier is resolved.
    """
    m = oversample * n
    fs = f_samples(f, m)
    fh = np.fft.ifft(fs)
    xi = (((np.arange(m) + m // 2) % m) - m // 2).astype(float)
    q = np.fft.fft(g0(xi) * fh).real
    return q[::oversample]


def dn_hn_vs_lf(n: int, f: TestFunction, gamma_n: float,
                kappa_n: float | None = None) -> float:
    """(1/n) sum_x |D_n h_n(x/n) + (1/4) L f(x/n)|^2 on the torus."""
    gk = gk_of(gamma_n, kappa_n)
    q_n = d_op(h_grid(n, f, gk))
    q_ref = l_f_reference(f, n)
    return float(np.sum((q_n - q_ref) ** 2) / n)


def _h_sums(h: np.ndarray) -> dict:
    n = h.shape[0]
    idx = np.arange(n)
    diag = h[idx, idx]
    return {
        "total": float(np.sum(h * h)),
        "diag": float(np.sum(diag * diag)),
        "d_op": float(np.sum(d_op(h) ** 2)),
        "diag_grad": float(np.sum((np.roll(diag, -1) - diag) ** 2)),
    }


def scaling_suite(n_list, f: TestFunction, coupling: float = 0.3, b: float = 0.5) -> dict:
    """Fit the nine growth exponents of the h_n and v_n square sums.

    The coupling schedule is gamma_n = coupling * n^{-b}.  Returns the raw
    sums per n and the fitted log2-log2 slopes.
    """
    n_list = sorted(int(n) for n in n_list)
    if len(n_list) < 4:
        raise ValueError("need at least four mesh sizes for a slope fit")
    rows = []
    for n in n_list:
        gamma_n = coupling * n ** (-b)
        gk = gk_of(gamma_n)
        h = h_grid(n, f, gk)
        row = {"n": n, "gamma_n": gamma_n}
        row.update({f"h_{k}": val for k, val in _h_sums(h).items()})
        v = v_grid(n, f, gk, h=h)
        del h
        vs = _h_sums(v)
        idx = np.arange(n)
        theta = v[idx, (idx + 1) % n] - v[idx, idx]
        vs["dtilde_band"] = float(np.sum((n * n * theta) ** 2))
        row.update({f"v_{k}": val for k, val in vs.items()})
        rows.append(row)
    keys = ["h_total", "h_diag", "h_d_op", "h_diag_grad",
            "v_total", "v_diag", "v_d_op", "v_diag_grad", "v_dtilde_band"]
    ns = np.asarray(n_list, dtype=float)
    logn = np.log2(ns)
    slopes = {}
    plain = {}
    for key in keys:
        vals = np.array([row[key] for row in rows])
        plain[key] = float(np.polyfit(logn, np.log2(vals), 1)[0])
        # The square sums carry O(n^{-1/2}) finite-size transients with large
        # prefactors, so a straight log-log fit over a dyadic window is
        # biased.  Extrapolate instead: local slopes between consecutive
        # sizes behave like a + d1 n^{-1/2} + d2 n^{-1}; fit in x = n^{-1/2}
        # (n taken at the geometric mean of each pair) and keep the
        # intercept.
        local = np.log2(vals[1:] / vals[:-1]) / (logn[1:] - logn[:-1])
        x = (ns[1:] * ns[:-1]) ** -0.25
        deg = 2 if local.size >= 3 else 1
        slopes[key] = float(np.polyfit(x, local, deg)[-1])
    return {"rows": rows, "slopes": slopes, "plain_slopes": plain}


def _phi_real_space(n: int, h: np.ndarray, fs: np.ndarray, gk: float) -> np.ndarray:
    """Band-corrected kernel built from h_n and the gradient of f."""
    sqn = np.sqrt(n)
    idx = np.arange(n)
    phi = 2.0 * sqn * (np.roll(h, 1, axis=0) - np.roll(h, -1, axis=0))
    phi[idx, idx] = 0.0
    grad_f = np.roll(fs, -1) - fs
    upper = h[(idx - 1) % n, (idx + 1) % n]
    phi[idx, (idx + 1) % n] = 2.0 * sqn * upper - n * gk * grad_f
    phi[idx, (idx - 1) % n] = -2.0 * sqn * h[(idx + 1) % n, (idx - 1) % n] \
        - n * gk * np.roll(grad_f, 1)
    return phi


def _psi_real_space(n: int, v: np.ndarray) -> np.ndarray:
    sqn = np.sqrt(n)
    idx = np.arange(n)
    psi = sqn * (np.roll(v, 1, axis=0) - np.roll(v, -1, axis=0))
    psi[idx, idx] = 0.0
    psi[idx, (idx + 1) % n] = sqn * v[(idx - 1) % n, (idx + 1) % n]
    psi[idx, (idx - 1) % n] = -sqn * v[(idx + 1) % n, (idx - 1) % n]
    return psi


def _ring_values(n: int, gk: float, names) -> dict:
    """Residue functions at y = s/n for all s (value fixed to 0 at s = 0)."""
    y = np.arange(n, dtype=float) / n
    y[0] = 0.5  # placeholder, replaced below
    vals = residue_functions(y, gk)
    out = {}
    for name in names:
        ring = vals[name]
        ring[0] = 0.0
        out[name] = ring
    return out


def phi_hat_suite(n: int, f: TestFunction, gamma_n: float,
                  kappa_n: float | None = None, exclude: int | None = None) -> dict:
    """Compare the exact 2-D Fourier sum of the kernel Phi_n against its
    factorization n^2 gk F_n(f)(n(k+l)) R_n(k,l).

    ``exclude`` drops frequency pairs with |(p+q) mod n| (signed) below the
    given value, where the contour integrals are only reached asymptotically.
    """
    gk = gk_of(gamma_n, kappa_n)
    fs = f_samples(f, n)
    h = h_grid(n, f, gk)
    phi = _phi_real_space(n, h, fs, gk)
    # Sum_{x,y} Phi e^{2 i pi (px + qy)/n}
    lhs = n * n * fourier_grid_2d(phi)

    fh = f_hat_grid(f, n)
    rings = _ring_values(n, gk, ("I", "J"))
    p = np.arange(n)
    pp, qq = np.meshgrid(p, p, indexing="ij")
    s = (pp + qq) % n
    _, omega, theta = lambda_omega_theta(pp / n, qq / n, gk)
    ek = np.exp(2j * np.pi * pp / n)
    # On the periodic lattice the band-resummation geometric series
    # sum_{j=1}^{n-1} e^{2 i pi j m / n} equals -1 plus an n * delta_{m=0}
    # contribution; the delta part survives as an explicit on-mode term
    # gk (e^{2 i pi k} - e^{-2 i pi k}) Theta(k, l) alongside the ring
    # integrals I and J of the infinite-lattice factorization.
    r_n = (1j * omega
           + gk * (rings["I"][s] * (1.0 / ek - ek) + rings["J"][s])
           + gk * (ek - 1.0 / ek) * theta)
    rhs = n * n * gk * fh[s] * r_n

    signed = ((s + n // 2) % n) - n // 2
    mask = np.abs(signed) >= (n // 16 if exclude is None else exclude)
    scale = np.max(np.abs(rhs))
    err_full = float(np.max(np.abs(lhs - rhs)) / scale)
    err_masked = float(np.max(np.abs(lhs - rhs)[mask]) / scale)
    return {"max_rel_err": err_masked, "max_rel_err_all": err_full, "scale": float(scale)}


def psi_hat_suite(n: int, f: TestFunction, gamma_n: float,
                  kappa_n: float | None = None, exclude: int | None = None) -> dict:
    """Same comparison for Psi_n against n^2 L(k+l) F_n(f)(n(k+l)) Rt_n(k,l)."""
    gk = gk_of(gamma_n, kappa_n)
    v = v_grid(n, f, gk, use_closed_form_w=True)
    psi = _psi_real_space(n, v)
    lhs = n * n * fourier_grid_2d(psi)

    fh = f_hat_grid(f, n)
    rings = _ring_values(n, gk, ("L", "M", "O"))
    p = np.arange(n)
    pp, qq = np.meshgrid(p, p, indexing="ij")
    s = (pp + qq) % n
    ek = np.exp(2j * np.pi * pp / n)
    es = np.exp(2j * np.pi * s / n)
    rt_n = rings["O"][s] * (1.0 / ek - ek) + (1.0 - es) * rings["M"][s]
    # Same finite-lattice delta term as in ``phi_hat_suite``: the on-mode
    # part of the band resummation contributes sqrt(n) (e^{2 i pi k} -
    # e^{-2 i pi k}) times the transform of v_n.
    v_hat = v_hat_grid(n, f, gk, use_closed_form_w=True)
    delta = np.sqrt(n) * (ek - 1.0 / ek) * n * n * v_hat
    rhs = n * n * rings["L"][s] * fh[s] * rt_n + delta

    signed = ((s + n // 2) % n) - n // 2
    mask = np.abs(signed) >= (n // 16 if exclude is None else exclude)
    scale = np.max(np.abs(rhs))
    err_full = float(np.max(np.abs(lhs - rhs)) / scale)
    err_masked = float(np.max(np.abs(lhs - rhs)[mask]) / scale)
    return {"max_rel_err": err_masked, "max_rel_err_all": err_full, "scale": float(scale)}


def u_n_bound_check(n: int, xi_values) -> dict:
    """Verify int |Omega(k, xi-k)|^2 / (z + sin^2 pi k + sin^2 pi(xi-k)) dk
    <= 4 n^{3/2} sin^2(pi xi) with z = n^{-3/2}."""
    z = n ** -1.5
    worst = 0.0
    for xi in xi_values:
        def integrand(k):
            om = 2.0 * (np.sin(2 * np.pi * k) + np.sin(2 * np.pi * (xi - k)))
            den = z + np.sin(np.pi * k) ** 2 + np.sin(np.pi * (xi - k)) ** 2
            return om * om / den

        val = quad(integrand, -0.5, 0.5, limit=400, epsrel=1e-10)[0]
        bound = 4.0 * n ** 1.5 * np.sin(np.pi * xi) ** 2
        if bound > 0:
            worst = max(worst, val / bound)
    return {"worst_ratio": worst, "z": z}


def cov_identity_check(rng: np.random.Generator, n: int = 4, degree: int = 5,
                       mesh: int = 256) -> float:
    """Shear change of variables for n-periodic integrands.

    For f periodic with period n in both directions, the square-domain
    integrals of f(k, l) and f(xi - l, l) coincide.  Checked on a random
    trigonometric polynomial with midpoint quadrature (exact below Nyquist).
    """
    deg = np.arange(-degree, degree + 1)
    coef = rng.normal(size=(deg.size, deg.size)) + 1j * rng.normal(size=(deg.size, deg.size))
    pts = -0.5 * n + n * (np.arange(mesh) + 0.5) / mesh
    kk, ll = np.meshgrid(pts, pts, indexing="ij")

    def trig(a, b):
        out = np.zeros_like(a, dtype=complex)
        for i, p in enumerate(deg):
            for j, q in enumerate(deg):
                out += coef[i, j] * np.exp(2j * np.pi * (p * a + q * b) / n)
        return out

    weight = (n / mesh) ** 2
    lhs = np.sum(trig(kk, ll)) * weight
    rhs = np.sum(trig(kk - ll, ll)) * weight
    return float(abs(lhs - rhs) / max(abs(lhs), 1.0))
