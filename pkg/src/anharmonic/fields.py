"""Fluctuation fields and Monte Carlo correlation estimation.

Fields pair a smooth compactly supported test function with a centered
conserved (or auxiliary) density at scale 1/sqrt(n):

    volume_field(f, w)  = (1/sqrt n) sum_x f(x/n) (w_x - <w>)
    energy_field(f, w)  = (1/sqrt n) sum_x f(x/n) (e(w_x) - <e>)

plus the cubic and quartic variants and the two-site Q-fields of the chaos
expansion.  Lattice coordinates are signed, x/n in [-1/2, 1/2), and all
evaluation is periodic on the unit torus.

`correlate` estimates E[field0(g, w(0)) * fieldT(f, w(t n^a))] over Monte
Carlo replicas drawn from equilibrium, with translation averaging over all
lattice shifts of the (g, f) pair as variance reduction, several probe
centers of f evaluated in a single simulation sweep, and a deterministic
replica-ordered merge (counter-based Philox streams keyed by replica index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .params import ModelParams
from . import equilibrium, dynamics


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

# mass of the standard bump exp(-1/(1-s^2)) on (-1,1)
_BUMP_MASS = integrate.quad(lambda s: math.exp(-1.0 / (1.0 - s * s)),
                            -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)[0]


@dataclass(frozen=True)
class TestFunction:
    """Smooth bump A*exp(-1/(1-((u-c)/w)^2)) supported on |u-c| < w."""
    center: float = 0.0
    width: float = 0.25
    amplitude: float = 1.0

    @classmethod
    def unit_mass(cls, center: float = 0.0, width: float = 0.25) -> "TestFunction":
        return cls(center, width, 1.0 / (width * _BUMP_MASS))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        s = (u - self.center) / self.width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - si * si))
        return out if out.ndim else float(out)

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        s = (u - self.center) / self.width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        d = 1.0 - si * si
        out[inside] = (self.amplitude * np.exp(-1.0 / d)
                       * (-2.0 * si / d**2) / self.width)
        return out if out.ndim else float(out)

    def periodic(self, u):
        """Evaluate on the unit torus (argument wrapped to nearest period)."""
        u = np.asarray(u, dtype=float)
        rel = u - self.center
        rel -= np.round(rel)
        return self(rel + self.center)

    def shifted(self, s: float) -> "TestFunction":
        return TestFunction(self.center + s, self.width, self.amplitude)


def grid_coordinates(n: int) -> np.ndarray:
    """Signed torus coordinates x/n in [-1/2, 1/2) for x = 0..n-1."""
    x = np.arange(n)
    return (((x + n // 2) % n) - n // 2) / n


def check_window(f: TestFunction, n: int) -> None:
    """Reject test functions whose support self-overlaps under periodization.

    The strict quarter-lattice margin of the design note cannot hold for the
    pinned theorem sweeps (the transported support leaves [-1/4, 1/4]); the
    hard invariant enforced here is that the support fits in half the torus.
    """
    if 2.0 * f.width > 0.5 + 1e-12:
        raise ValueError(
            f"test function width {f.width} violates the safe window "
            f"(support {2*f.width:.3f} > half torus) at n={n}")


# ---------------------------------------------------------------------------
# site densities and field sums
# ---------------------------------------------------------------------------

def site_density(kind: str, omega: np.ndarray, p: ModelParams) -> np.ndarray:
    """Per-site centered density entering a fluctuation field.

    Centerings come from quadrature (never sample means).  Kinds:
    volume, energy, volume3 (raw w^3), volume3_centered (w^3 - kappa*w),
    quartic (w^4 - <w^4>).
    """
    if kind == "volume":
        return omega - equilibrium.moment(1, p)
    if kind == "energy":
        return (equilibrium.site_energy(omega, p.gamma)
                - equilibrium.expectation(lambda u: equilibrium.site_energy(u, p.gamma), p))
    if kind == "volume3":
        return omega**3 - equilibrium.moment(3, p)
    if kind == "volume3_centered":
        return omega**3 - equilibrium.kappa(p.gamma, p.beta) * omega
    if kind == "quartic":
        return omega**4 - equilibrium.moment(4, p)
    raise ValueError(f"unknown field kind {kind!r}")


def field_value(kind: str, f: TestFunction, omega: np.ndarray,
                p: ModelParams, shift: float = 0.0) -> float:
    """(1/sqrt n) sum_x f(x/n - shift) * density_x, periodic evaluation."""
    n = len(omega)
    check_window(f, n)
    u = grid_coordinates(n)
    fs = f.shifted(shift).periodic(u) if shift else f.periodic(u)
    return float(fs @ site_density(kind, omega, p)) / math.sqrt(n)


def volume_field(f, omega, p, shift=0.0):
    return field_value("volume", f, omega, p, shift)


def energy_field(f, omega, p, shift=0.0):
    return field_value("energy", f, omega, p, shift)


def volume3_field(f, omega, p, shift=0.0, centered=False):
    kind = "volume3_centered" if centered else "volume3"
    return field_value(kind, f, omega, p, shift)


def quartic_field(f, omega, p, shift=0.0):
    return field_value("quartic", f, omega, p, shift)


def q_field(order: int, h, omega: np.ndarray, p: ModelParams) -> float:
    """(1/n) sum_{x != y} h(x/n, y/n) * pair term; h's diagonal is ignored.

    order 2: w_x w_y; order 4: (w_x^3 - kappa w_x) w_y;
    order 6: (w_x^3 - kappa w_x)(w_y^3 - kappa w_y).
    """
    if order not in (2, 4, 6):
        raise ValueError("order must be 2, 4 or 6")
    n = len(omega)
    u = grid_coordinates(n)
    H = np.asarray(h(u[:, None], u[None, :]), dtype=float)
    np.fill_diagonal(H, 0.0)
    k = equilibrium.kappa(p.gamma, p.beta)
    w3c = omega**3 - k * omega
    left = omega if order == 2 else w3c
    right = omega if order in (2, 4) else w3c
    if order == 4:
        left, right = w3c, omega
    return float(left @ H @ right) / n


def norm_2n(f: TestFunction, n: int) -> float:
    """||f||_{2,n} = sqrt((1/n) sum f(x/n)^2)."""
    u = grid_coordinates(n)
    return math.sqrt(float(np.sum(f.periodic(u) ** 2)) / n)


def nneq(h, n: int) -> float:
    """N_n^{!=}(h) = sqrt((1/n^2) sum_{x != y} h(x/n,y/n)^2)."""
    u = grid_coordinates(n)
    H = np.asarray(h(u[:, None], u[None, :]), dtype=float)
    np.fill_diagonal(H, 0.0)
    return math.sqrt(float(np.sum(H * H))) / n


def moving_frame(f: TestFunction, t: float, p: ModelParams,
                 chi: float) -> tuple[TestFunction, float]:
    """Frame-shifted test function f((x - c_n t n^a)/n) and c_n.

    c_n = -2 - 6*chi*gamma; the macroscopic shift c_n * t * n^(a-1) is reduced
    modulo the torus.
    """
    c_n = -2.0 - 6.0 * chi * p.gamma
    shift = c_n * t * float(p.n) ** (p.a - 1.0)
    shift -= round(shift)
    return f.shifted(shift), c_n


# ---------------------------------------------------------------------------
# Monte Carlo correlation estimation
# ---------------------------------------------------------------------------

@dataclass
class CorrelationEstimate:
    mean: np.ndarray          # one entry per probe center
    stderr: np.ndarray
    replicas: int
    t: float
    a: float
    n: int
    kind0: str
    kindT: str
    centers: np.ndarray


def replica_rng(master_seed: int, replica: int) -> np.random.Generator:
    """Counter-based stream: Philox keyed by (master seed, replica index)."""
    return np.random.Generator(np.random.Philox(key=(master_seed << 64) | replica))


def _replica_products(args) -> np.ndarray:
    """Per-replica translation-averaged products, one value per probe center."""
    (r, master_seed, n, beta, gamma, a, t, kind0, kindT,
     g_params, f_params, centers, frame_shift, translation_average) = args
    p = ModelParams(n=n, beta=beta, tau=0.0, gamma=gamma, a=a)
    rng = replica_rng(master_seed, r)
    omega0 = equilibrium.sample_sites(p, n, rng)
    u = grid_coordinates(n)
    g = TestFunction(*g_params)
    c0 = site_density(kind0, omega0, p)

    if t > 0.0:
        st = dynamics.LatticeState(omega0, gamma=gamma)
        duration = t * float(n) ** a
        st = dynamics.evolve(st, duration, p, rng)
        omega_t = st.omega
    else:
        omega_t = omega0
    cT = site_density(kindT, omega_t, p)

    gs = g.periodic(u)
    out = np.empty(len(centers))
    if translation_average:
        A = np.fft.ifft(np.fft.fft(c0) * np.conj(np.fft.fft(gs))).real
        CT = np.fft.fft(cT)
        for j, c in enumerate(centers):
            f = TestFunction(c + frame_shift, f_params[1], f_params[2])
            fs = f.periodic(u)
            B = np.fft.ifft(CT * np.conj(np.fft.fft(fs))).real
            out[j] = float(A @ B) / (n * n)
    else:
        A0 = float(gs @ c0) / math.sqrt(n)
        for j, c in enumerate(centers):
            f = TestFunction(c + frame_shift, f_params[1], f_params[2])
            out[j] = A0 * float(f.periodic(u) @ cT) / math.sqrt(n)
    return out


def correlate(kind0: str, g: TestFunction, kindT: str, f: TestFunction,
              t: float, p: ModelParams, M: int, master_seed: int,
              centers: Sequence[float] | None = None,
              frame_shift: float = 0.0, threads: int = 1,
              translation_average: bool = True) -> CorrelationEstimate:
    """Monte Carlo correlation E[field0(g, w(0)) fieldT(f_c, w(t n^a))].

    f_c runs over `centers` (default: the single center of f); all centers
    share the simulated trajectories.  frame_shift is an additional macro
    shift applied to f (moving frame).  Results are reduced in replica order
    so they do not depend on `threads`.
    """
    if M < 100:
        raise ValueError("M must be >= 100")
    check_window(g, p.n)
    check_window(f, p.n)
    if centers is None:
        centers = [f.center]
    centers = np.asarray(centers, dtype=float)
    args = [(r, master_seed, p.n, p.beta, p.gamma, p.a, t, kind0, kindT,
             (g.center, g.width, g.amplitude), (f.center, f.width, f.amplitude),
             centers, frame_shift, translation_average)
            for r in range(M)]
    if threads > 1:
        import multiprocessing as mp
        ctx = mp.get_context("fork")
        with ctx.Pool(threads) as pool:
            vals = pool.map(_replica_products, args, chunksize=64)
    else:
        vals = [_replica_products(a) for a in args]
    vals = np.asarray(vals)                      # (M, centers), replica order
    mean = np.add.reduce(vals, axis=0) / M       # pairwise, order-fixed
    resid = vals - mean
    var = np.add.reduce(resid * resid, axis=0) / (M - 1)
    stderr = np.sqrt(var / M)
    return CorrelationEstimate(mean=mean, stderr=stderr, replicas=M, t=t,
                               a=p.a, n=p.n, kind0=kind0, kindT=kindT,
                               centers=centers)
