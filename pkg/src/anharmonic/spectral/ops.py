"""Discrete difference operators and lattice Fourier transforms.

All operators act on samples over the periodic mesh (1/n)Z/Z: a 1-D grid
function is an array ``f[x]`` of samples at the signed coordinates
``grid_coordinates(n)`` and a 2-D grid function is an ``(n, n)`` array
``h[x, y]``.  Every stencil is exact (pure finite differences), no
interpolation is involved anywhere.
"""

from __future__ import annotations

import numpy as np

from ..fields import TestFunction, grid_coordinates

__all__ = [
    "grad1",
    "lap1",
    "grad_tensor_delta",
    "lap2",
    "grad_diag",
    "a_op",
    "d_op",
    "dtilde_op",
    "b_op",
    "discrete_ops",
    "fourier_n",
    "fourier_grid_1d",
    "fourier_grid_2d",
    "inverse_fourier_grid_2d",
    "lambda_omega_theta",
]


def _check_1d(f: np.ndarray) -> int:
    f = np.asarray(f)
    if f.ndim != 1:
        raise ValueError("expected a 1-D grid function")
    return f.shape[0]


def _check_2d(h: np.ndarray) -> int:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square 2-D grid function")
    return h.shape[0]


# ---------------------------------------------------------------------------
# one-dimensional stencils
# ---------------------------------------------------------------------------

def grad1(f: np.ndarray) -> np.ndarray:
    """n [f((x+1)/n) - f(x/n)]."""
    n = _check_1d(f)
    return n * (np.roll(f, -1) - f)


def lap1(f: np.ndarray) -> np.ndarray:
    """n^2 [f((x+1)/n) + f((x-1)/n) - 2 f(x/n)]."""
    n = _check_1d(f)
    return n * n * (np.roll(f, -1) + np.roll(f, 1) - 2.0 * f)


# ---------------------------------------------------------------------------
# two-dimensional stencils
# ---------------------------------------------------------------------------

def grad_tensor_delta(f: np.ndarray) -> np.ndarray:
    """Band matrix approximating f'(x) delta(x=y).

    Nonzero only on y = x +/- 1: (n^2/2){f((x+1)/n) - f(x/n)} on the upper
    band and (n^2/2){f(x/n) - f((x-1)/n)} on the lower one.
    """
    n = _check_1d(f)
    out = np.zeros((n, n))
    idx = np.arange(n)
    out[idx, (idx + 1) % n] = 0.5 * n * n * (np.roll(f, -1) - f)
    out[idx, (idx - 1) % n] = 0.5 * n * n * (f - np.roll(f, 1))
    return out


def lap2(h: np.ndarray) -> np.ndarray:
    """Five-point 2-D Laplacian scaled by n^2."""
    n = _check_2d(h)
    return n * n * (
        np.roll(h, -1, axis=0)
        + np.roll(h, 1, axis=0)
        + np.roll(h, -1, axis=1)
        + np.roll(h, 1, axis=1)
        - 4.0 * h
    )


def grad_diag(h: np.ndarray) -> np.ndarray:
    """Gradient of h along the diagonal, supported on the bands y = x +/- 1."""
    n = _check_2d(h)
    out = np.zeros((n, n))
    idx = np.arange(n)
    diag = h[idx, idx]
    out[idx, (idx + 1) % n] = 0.5 * n * (np.roll(diag, -1) - diag)
    out[idx, (idx - 1) % n] = 0.5 * n * (diag - np.roll(diag, 1))
    return out


def a_op(h: np.ndarray) -> np.ndarray:
    """n {h(x, y-1) + h(x-1, y) - h(x, y+1) - h(x+1, y)}."""
    n = _check_2d(h)
    return n * (
        np.roll(h, 1, axis=1)
        + np.roll(h, 1, axis=0)
        - np.roll(h, -1, axis=1)
        - np.roll(h, -1, axis=0)
    )


def d_op(h: np.ndarray) -> np.ndarray:
    """Diagonal directional derivative n {h(x, x+1) - h(x-1, x)} (1-D output)."""
    n = _check_2d(h)
    idx = np.arange(n)
    upper = h[idx, (idx + 1) % n]
    return n * (upper - np.roll(upper, 1))


def dtilde_op(h: np.ndarray) -> np.ndarray:
    """n^2 band operator approximating d_y h(x,x) tensor delta(x=y)."""
    n = _check_2d(h)
    out = np.zeros((n, n))
    idx = np.arange(n)
    diag = h[idx, idx]
    upper = h[idx, (idx + 1) % n]
    out[idx, (idx + 1) % n] = n * n * (upper - diag)
    out[idx, (idx - 1) % n] = n * n * np.roll(upper - diag, 1)
    return out


def b_op(h: np.ndarray) -> np.ndarray:
    """sqrt(n){h(x-1,y) - h(x+1,y) + (1_{y=x+1} - 1_{y=x-1}) h(y,y)}."""
    n = _check_2d(h)
    out = np.roll(h, 1, axis=0) - np.roll(h, -1, axis=0)
    idx = np.arange(n)
    diag = h[idx, idx]
    out[idx, (idx + 1) % n] += np.roll(diag, -1)
    out[idx, (idx - 1) % n] -= np.roll(diag, 1)
    return np.sqrt(n) * out


_OPS_1D = {"grad1": grad1, "lap1": lap1, "grad_tensor_delta": grad_tensor_delta}
_OPS_2D = {
    "lap2": lap2,
    "grad_diag": grad_diag,
    "a": a_op,
    "d": d_op,
    "dtilde": dtilde_op,
    "b": b_op,
}


def discrete_ops(kind: str, operand: np.ndarray) -> np.ndarray:
    """Dispatch by name; validates the operand dimensionality."""
    if kind in _OPS_1D:
        return _OPS_1D[kind](operand)
    if kind in _OPS_2D:
        return _OPS_2D[kind](operand)
    raise ValueError(f"unknown operator kind: {kind!r}")


# ---------------------------------------------------------------------------
# lattice Fourier transforms, convention F_n(g)(xi) = (1/n) sum g(x/n) e^{2i pi x xi / n}
# ---------------------------------------------------------------------------

def fourier_n(g, xi, n: int | None = None) -> complex | np.ndarray:
    """Lattice Fourier transform at (possibly non-integer) frequency xi.

    ``g`` is either a TestFunction (sampled on the signed mesh of size n) or a
    1-D array of samples indexed by the site x = 0..n-1.
    """
    if isinstance(g, TestFunction):
        if n is None:
            raise ValueError("n is required for TestFunction input")
        coords = grid_coordinates(n)
        samples = g.periodic(coords)
        x = np.rint(coords * n)
    else:
        samples = np.asarray(g, dtype=float)
        n = samples.shape[0]
        x = np.arange(n)
    xi = np.asarray(xi)
    phase = np.exp(2j * np.pi * np.multiply.outer(xi, x) / n)
    out = phase @ samples / n
    return out if out.ndim else complex(out)


def fourier_grid_1d(samples: np.ndarray) -> np.ndarray:
    """F_n at all integer frequencies 0..n-1 (periodic in xi)."""
    return np.fft.ifft(samples)


def fourier_grid_2d(h: np.ndarray) -> np.ndarray:
    """(1/n^2) sum h(x,y) e^{2i pi (xu + yv)/n} on the integer frequency grid."""
    return np.fft.ifft2(h)


def inverse_fourier_grid_2d(H: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fourier_grid_2d`."""
    return np.fft.fft2(H)


def lambda_omega_theta(k, l, gk: float):
    """The symbols Lambda, Omega and Theta = i Omega / (gk Lambda - i Omega).

    ``gk`` is the factor (1 + kappa_n gamma_n) >= 1.  Theta is set to 0 at the
    removable point k = l = 0 (mod 1).
    """
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    lam = 4.0 * (np.sin(np.pi * k) ** 2 + np.sin(np.pi * l) ** 2)
    omega = 2.0 * (np.sin(2.0 * np.pi * k) + np.sin(2.0 * np.pi * l))
    denom = gk * lam - 1j * omega
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(denom == 0, 0.0, 1j * omega / np.where(denom == 0, 1.0, denom))
    if theta.ndim == 0:
        return float(lam), float(omega), complex(theta)
    return lam, omega, theta
