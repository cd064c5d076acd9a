"""Exact generator-algebra identities for the volume, energy and quadratic
fields.

All stencils here are the unscaled lattice differences (no powers of n); the
identities are pure algebra in the state, valid pointwise for every
configuration, and hold for an arbitrary value of the centering constant
kappa because it cancels between the orthogonal-polynomial fields.
"""

from __future__ import annotations

import numpy as np

from .dynamics import LocalObservable, apply_generator, omega3_residual
from .equilibrium import kappa as equilibrium_kappa
from .params import ModelParams

__all__ = [
    "vol_identity_residual",
    "energy_identity_residual",
    "q2_identity_residual",
    "identity_suite",
]


# -- unscaled lattice stencils ----------------------------------------------

def _grad(f: np.ndarray) -> np.ndarray:
    return np.roll(f, -1) - f


def _lap(f: np.ndarray) -> np.ndarray:
    return np.roll(f, -1) + np.roll(f, 1) - 2.0 * f


def _grad_tensor_delta(f: np.ndarray) -> np.ndarray:
    n = f.shape[0]
    idx = np.arange(n)
    g = np.zeros((n, n))
    g[idx, (idx + 1) % n] = 0.5 * (np.roll(f, -1) - f)
    g[idx, (idx - 1) % n] = 0.5 * (f - np.roll(f, 1))
    return g


def _lap2(h: np.ndarray) -> np.ndarray:
    return (np.roll(h, -1, 0) + np.roll(h, 1, 0)
            + np.roll(h, -1, 1) + np.roll(h, 1, 1) - 4.0 * h)


def _a_stencil(h: np.ndarray) -> np.ndarray:
    return (np.roll(h, 1, 0) + np.roll(h, 1, 1)
            - np.roll(h, -1, 0) - np.roll(h, -1, 1))


def _d_stencil(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    idx = np.arange(n)
    upper = h[idx, (idx + 1) % n]
    return upper - np.roll(upper, 1)


def _dtilde_stencil(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    idx = np.arange(n)
    band = h[idx, (idx + 1) % n] - h[idx, idx]
    out = np.zeros((n, n))
    out[idx, (idx + 1) % n] = band
    out[idx, (idx - 1) % n] = np.roll(band, 1)
    return out


def _grad_diag(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    idx = np.arange(n)
    diag = h[idx, idx]
    out = np.zeros((n, n))
    out[idx, (idx + 1) % n] = 0.5 * (np.roll(diag, -1) - diag)
    out[idx, (idx - 1) % n] = 0.5 * (diag - np.roll(diag, 1))
    return out


def _b_stencil(h: np.ndarray) -> np.ndarray:
    n = h.shape[0]
    idx = np.arange(n)
    out = np.roll(h, 1, 0) - np.roll(h, -1, 0)
    diag = h[idx, idx]
    out[idx, (idx + 1) % n] += np.roll(diag, -1)
    out[idx, (idx - 1) % n] -= np.roll(diag, 1)
    return out


# -- field evaluations -------------------------------------------------------

def _v(f, w):
    return float(f @ w)


def _v3(f, w, kap):
    return float(f @ (w ** 3 - kap * w))


def _e_n(f, w, gamma):
    return float(f @ (0.5 * w ** 2 + 0.25 * gamma * w ** 4))


def _e4(f, w):
    return float(f @ w ** 4)


def _offdiag_quad(h, a, b):
    """sum_{x != y} h(x,y) a_x b_y."""
    full = a @ h @ b
    diag = float(np.sum(np.diag(h) * a * b))
    return float(full) - diag


def _q2(h, w):
    return _offdiag_quad(h, w, w)


def _q4(h, w, kap):
    return _offdiag_quad(h, w ** 3 - kap * w, w)


def _q6(h, w, kap):
    g = w ** 3 - kap * w
    return _offdiag_quad(h, g, g)


# -- observables for the generator side ---------------------------------------

def _v_observable(f):
    return LocalObservable((f[x], {x: 1}) for x in np.flatnonzero(f))


def _e_observable(f, gamma):
    terms = []
    for x in np.flatnonzero(f):
        terms.append((0.5 * f[x], {int(x): 2}))
        terms.append((0.25 * gamma * f[x], {int(x): 4}))
    return LocalObservable(terms)


def _q2_observable(h):
    n = h.shape[0]
    terms = []
    for x, y in zip(*np.nonzero(h)):
        if x != y:
            terms.append((h[x, y], {int(x): 1, int(y): 1}))
    return LocalObservable(terms)


def _rel(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)


# -- the three identities -----------------------------------------------------

def vol_identity_residual(w: np.ndarray, f: np.ndarray, gamma: float,
                          kap: float | None = None) -> float:
    """L V(f) = V((2+gk')Df - 2(1+gk')grad f) + gamma V3(Df - 2 grad f),
    gk' = gamma*kappa."""
    if kap is None:
        kap = equilibrium_kappa(gamma)
    p = ModelParams(n=len(w), beta=1.0, gamma=gamma)
    lhs = apply_generator(_v_observable(f), w, p)
    gk = gamma * kap
    lap, grd = _lap(f), _grad(f)
    rhs = _v((2.0 + gk) * lap - 2.0 * (1.0 + gk) * grd, w) \
        + gamma * _v3(lap - 2.0 * grd, w, kap)
    return _rel(lhs, rhs)


def energy_identity_residual(w: np.ndarray, f: np.ndarray, gamma: float,
                             kap: float | None = None) -> float:
    """L E(f) = E(Df) - (1+gk)^2 Q2(grad f x delta)
    - 2 gamma (1+gk) Q4(grad f x delta) - gamma^2 Q6(grad f x delta)."""
    if kap is None:
        kap = equilibrium_kappa(gamma)
    p = ModelParams(n=len(w), beta=1.0, gamma=gamma)
    lhs = apply_generator(_e_observable(f, gamma), w, p)
    gk1 = 1.0 + gamma * kap
    g = _grad_tensor_delta(f)
    rhs = (_e_n(_lap(f), w, gamma)
           - gk1 * gk1 * _q2(g, w)
           - 2.0 * gamma * gk1 * _q4(g, w, kap)
           - gamma * gamma * _q6(g, w, kap))
    return _rel(lhs, rhs)


def q2_identity_residual(w: np.ndarray, h: np.ndarray, gamma: float,
                         kap: float | None = None) -> float:
    """For symmetric h:
    L Q2(h) = Q2(D2 h + (1+gk) A h) - 4 E(D h) - gamma E4(D h)
    + 2 Q2(Dtilde h) + 2 gamma Q4(B h) + 2 gamma kappa Q2(grad_diag h)."""
    if kap is None:
        kap = equilibrium_kappa(gamma)
    if not np.allclose(h, h.T):
        raise ValueError("h must be symmetric")
    p = ModelParams(n=h.shape[0], beta=1.0, gamma=gamma)
    lhs = apply_generator(_q2_observable(h), w, p)
    gk1 = 1.0 + gamma * kap
    d = _d_stencil(h)
    rhs = (_q2(_lap2(h) + gk1 * _a_stencil(h), w)
           - 4.0 * _e_n(d, w, gamma)
           - gamma * _e4(d, w)
           + 2.0 * _q2(_dtilde_stencil(h), w)
           + 2.0 * gamma * _q4(_b_stencil(h), w, kap)
           + 2.0 * gamma * kap * _q2(_grad_diag(h), w))
    return _rel(lhs, rhs)


def identity_suite(n: int = 32, n_states: int = 100, seed: int = 0,
                   gamma: float = 0.05, support: int = 8) -> dict:
    """Check the three decompositions plus the cubic-term identity at random
    states; returns the worst relative errors."""
    rng = np.random.default_rng(seed)
    worst = {"volume": 0.0, "energy": 0.0, "quadratic": 0.0, "omega3": 0.0}
    for _ in range(n_states):
        w = rng.normal(size=n)
        f = np.zeros(n)
        f[:support] = rng.normal(size=support)
        patch = rng.normal(size=(support, support))
        h = np.zeros((n, n))
        h[:support, :support] = patch + patch.T
        worst["volume"] = max(worst["volume"],
                              vol_identity_residual(w, f, gamma))
        worst["energy"] = max(worst["energy"],
                              energy_identity_residual(w, f, gamma))
        worst["quadratic"] = max(worst["quadratic"],
                                 q2_identity_residual(w, h, gamma))
        x = int(rng.integers(n))
        chi = float(rng.uniform(0.5, 2.0))
        r_a = omega3_residual(w, x, 1e-2, chi)[1]
        r_b = omega3_residual(w, x, 1e-3, chi)[1]
        scale = max(abs(r_a), abs(r_b), 1.0)
        worst["omega3"] = max(worst["omega3"], abs(r_a - r_b) / scale)
    return worst
