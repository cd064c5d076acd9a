"""Markov dynamics of the chain: Hamiltonian drift + exchange noise.

The generator is L = A + S with

    A = sum_x [(w_{x+1} - w_{x-1}) + gamma*(w_{x+1}^3 - w_{x-1}^3)] d/dw_x
    (S phi)(w) = sum_x [phi(w^{x,x+1}) - phi(w)]

on a periodic lattice of n sites.  Simulation is event-driven: exact
exponential clocks of total rate n decide the swap times, and the smooth
drift ODE is integrated with fixed-substep RK4 between events.  The hot loop
is compiled with numba; random numbers are drawn outside it from a
counter-based stream so trajectories are reproducible under any scheduling.

`apply_generator` evaluates L phi exactly for symbolic polynomial
observables (used by the generator-algebra identity tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple

import numpy as np
from numba import njit

from .params import ModelParams
from .equilibrium import site_energy

OVERFLOW_CAP = 1e6
DT_MAX = 5e-3
ENERGY_DRIFT_BUDGET = 1e-7   # relative, per unit time
MAX_DEGREE = 8


# ---------------------------------------------------------------------------
# state and elementary moves
# ---------------------------------------------------------------------------

@dataclass
class LatticeState:
    omega: np.ndarray
    t: float = 0.0
    volume0: float = field(default=None)
    energy0: float = field(default=None)
    gamma: float = 0.0

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.volume0 is None:
            self.volume0 = float(self.omega.sum())
        if self.energy0 is None:
            self.energy0 = float(site_energy(self.omega, self.gamma).sum())

    @property
    def n(self) -> int:
        return len(self.omega)


def drift(omega: np.ndarray, gamma: float) -> np.ndarray:
    """dw_x/dt = (w_{x+1} - w_{x-1}) + gamma*(w_{x+1}^3 - w_{x-1}^3)."""
    if np.max(np.abs(omega)) >= OVERFLOW_CAP:
        raise FloatingPointError("configuration exceeds overflow guard "
                                 f"(|w| >= {OVERFLOW_CAP:g}) — integrator blow-up")
    wp = np.roll(omega, -1)
    wm = np.roll(omega, 1)
    return (wp - wm) + gamma * (wp**3 - wm**3)


def step_ode(state: LatticeState, dt: float) -> LatticeState:
    """One classical RK4 step of the drift ODE (noise off)."""
    if not 0.0 < dt <= 0.05:
        raise ValueError("dt must be in (0, 0.05]")
    w = state.omega
    g = state.gamma
    k1 = drift(w, g)
    k2 = drift(w + 0.5 * dt * k1, g)
    k3 = drift(w + 0.5 * dt * k2, g)
    k4 = drift(w + dt * k3, g)
    return LatticeState(w + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4),
                        t=state.t + dt, volume0=state.volume0,
                        energy0=state.energy0, gamma=g)


def swap(state: LatticeState, x: int) -> LatticeState:
    """Exchange w_x and w_{x+1} (periodic)."""
    n = state.n
    if not 0 <= x < n:
        raise ValueError("bond index out of range")
    w = state.omega.copy()
    y = (x + 1) % n
    w[x], w[y] = w[y], w[x]
    return LatticeState(w, t=state.t, volume0=state.volume0,
                        energy0=state.energy0, gamma=state.gamma)


# ---------------------------------------------------------------------------
# event-driven evolution (numba kernel)
# ---------------------------------------------------------------------------

@njit(cache=True, fastmath=True)
def _rk4_segment(w, seg, gamma, dt_max, k1, k2, k3, k4, tmp):
    n = w.shape[0]
    m = int(np.ceil(seg / dt_max))
    if m < 1:
        m = 1
    dt = seg / m
    for _ in range(m):
        for x in range(n):
            wp = w[x + 1] if x + 1 < n else w[0]
            wm = w[x - 1] if x - 1 >= 0 else w[n - 1]
            k1[x] = (wp - wm) + gamma * (wp * wp * wp - wm * wm * wm)
        for x in range(n):
            tmp[x] = w[x] + 0.5 * dt * k1[x]
        for x in range(n):
            wp = tmp[x + 1] if x + 1 < n else tmp[0]
            wm = tmp[x - 1] if x - 1 >= 0 else tmp[n - 1]
            k2[x] = (wp - wm) + gamma * (wp * wp * wp - wm * wm * wm)
        for x in range(n):
            tmp[x] = w[x] + 0.5 * dt * k2[x]
        for x in range(n):
            wp = tmp[x + 1] if x + 1 < n else tmp[0]
            wm = tmp[x - 1] if x - 1 >= 0 else tmp[n - 1]
            k3[x] = (wp - wm) + gamma * (wp * wp * wp - wm * wm * wm)
        for x in range(n):
            tmp[x] = w[x] + dt * k3[x]
        for x in range(n):
            wp = tmp[x + 1] if x + 1 < n else tmp[0]
            wm = tmp[x - 1] if x - 1 >= 0 else tmp[n - 1]
            k4[x] = (wp - wm) + gamma * (wp * wp * wp - wm * wm * wm)
        for x in range(n):
            w[x] += (dt / 6.0) * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x])


@njit(cache=True, fastmath=True)
def _evolve_kernel(w, duration, gamma, dt_max, gaps, bonds):
    """Event-driven dynamics; returns (time advanced, swaps applied).

    If the pre-drawn clock arrays are exhausted before the horizon, stops at
    the last event so the caller can extend the streams.
    """
    n = w.shape[0]
    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    tmp = np.empty(n)
    t = 0.0
    i = 0
    while i < gaps.shape[0]:
        gap = gaps[i]
        if t + gap >= duration:
            seg = duration - t
            if seg > 0.0:
                _rk4_segment(w, seg, gamma, dt_max, k1, k2, k3, k4, tmp)
            return duration, i
        if gap > 0.0:
            _rk4_segment(w, gap, gamma, dt_max, k1, k2, k3, k4, tmp)
        b = bonds[i]
        y = b + 1 if b + 1 < n else 0
        w[b], w[y] = w[y], w[b]
        t += gap
        i += 1
    return t, i


def evolve(state: LatticeState, duration: float, params: ModelParams,
           rng: np.random.Generator, dt_max: float = DT_MAX) -> LatticeState:
    """Evolve for `duration` units of the (unaccelerated) generator time.

    Swap times are exact Poisson clocks of total rate n; between events the
    drift ODE is integrated by RK4 with substeps of at most dt_max.  The
    energy drift of the integrator is monitored against the budget
    1e-7 relative per unit time.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    w = state.omega.copy()
    n = len(w)
    g = params.gamma
    if duration == 0.0:
        return LatticeState(w, t=state.t, volume0=state.volume0,
                            energy0=state.energy0, gamma=g)
    rate = float(n)
    remaining = duration
    swaps = 0
    while remaining > 0.0:
        mean_events = rate * remaining
        m = int(mean_events + 6.0 * math.sqrt(mean_events) + 16.0)
        gaps = rng.exponential(1.0 / rate, size=m)
        bonds = rng.integers(0, n, size=m)
        advanced, used = _evolve_kernel(w, remaining, g, dt_max, gaps, bonds)
        swaps += used
        remaining -= advanced

    if np.max(np.abs(w)) >= OVERFLOW_CAP:
        raise FloatingPointError("integrator blow-up during evolve")
    out = LatticeState(w, t=state.t + duration, volume0=state.volume0,
                       energy0=state.energy0, gamma=g)
    e_now = float(site_energy(w, g).sum())
    budget = ENERGY_DRIFT_BUDGET * max(duration, 1.0) * abs(state.energy0)
    if abs(e_now - state.energy0) > max(budget, 1e-12):
        raise ArithmeticError(
            f"energy drift {e_now - state.energy0:.3e} exceeds budget {budget:.3e}")
    return out


# ---------------------------------------------------------------------------
# symbolic local observables and exact generator application
# ---------------------------------------------------------------------------

class LocalObservable:
    """Finite sum of monomials c * prod_x w_x^{e_x} over finitely many sites.

    Terms are (coefficient, ((site, exponent), ...)) with sites taken modulo
    the lattice size at evaluation time.
    """

    def __init__(self, terms: Iterable[Tuple[float, Dict[int, int]]] = ()):
        self.terms: list[tuple[float, Tuple[Tuple[int, int], ...]]] = []
        for c, mono in terms:
            self._add_term(c, mono)

    def _add_term(self, c: float, mono: Dict[int, int] | Tuple):
        if isinstance(mono, dict):
            mono = tuple(sorted((x, e) for x, e in mono.items() if e != 0))
        if sum(e for _, e in mono) > MAX_DEGREE:
            raise ValueError(f"degree exceeds {MAX_DEGREE}")
        if c != 0.0:
            self.terms.append((float(c), mono))

    @classmethod
    def monomial(cls, coef: float, powers: Dict[int, int]) -> "LocalObservable":
        return cls([(coef, powers)])

    def __add__(self, other: "LocalObservable") -> "LocalObservable":
        out = LocalObservable()
        out.terms = list(self.terms) + list(other.terms)
        return out

    def scaled(self, c: float) -> "LocalObservable":
        out = LocalObservable()
        out.terms = [(c * a, mono) for a, mono in self.terms]
        return out

    def support(self) -> set:
        return {x for _, mono in self.terms for x, _ in mono}

    def evaluate(self, omega: np.ndarray) -> float:
        n = len(omega)
        total = 0.0
        for c, mono in self.terms:
            v = c
            for x, e in mono:
                v *= omega[x % n] ** e
            total += v
        return total

    def derivative(self, z: int) -> "LocalObservable":
        """Formal d/dw_z."""
        out = LocalObservable()
        for c, mono in self.terms:
            d = dict(mono)
            e = d.get(z, 0)
            if e:
                d[z] = e - 1
                out._add_term(c * e, d)
        return out


def apply_generator(phi: LocalObservable, omega: np.ndarray,
                    params: ModelParams) -> float:
    """Exact (L phi)(omega) = (A phi)(omega) + (S phi)(omega) on the torus."""
    n = len(omega)
    g = params.gamma
    dr = drift(omega, g)
    total = 0.0
    for z in sorted({x % n for x in phi.support()}):
        total += dr[z] * phi.derivative(z).evaluate(omega)

    # exchange part: only terms touching the swapped pair can change
    by_site: Dict[int, list] = {}
    for idx, (_, mono) in enumerate(phi.terms):
        for x, _ in mono:
            by_site.setdefault(x % n, []).append(idx)
    touched_bonds = set()
    for x in by_site:
        touched_bonds.add((x - 1) % n)
        touched_bonds.add(x)
    for b in touched_bonds:
        y = (b + 1) % n
        ids = set(by_site.get(b, [])) | set(by_site.get(y, []))
        if not ids:
            continue
        wsw = omega.copy()
        wsw[b], wsw[y] = wsw[y], wsw[b]
        for i in ids:
            c, mono = phi.terms[i]
            v0 = c
            v1 = c
            for x, e in mono:
                v0 *= omega[x % n] ** e
                v1 *= wsw[x % n] ** e
            total += v1 - v0
    return total


def omega3_residual(omega: np.ndarray, x: int, gamma: float,
                    chi_n: float) -> tuple[float, float]:
    """Decompose w_x^3 via the microscopic identity and return (residual, psi).

    w_x^3 = (-L)(w_x^2 w_{x+1}) + [3 w_x (w_{x+1}^2 - chi)
            + (w_x^2 - chi)(2 w_{x+2} - 3 w_{x+1}) + (w_{x-1}^2 - chi) w_{x+1}]
            - 2 w_{x-1} w_x w_{x+1} + chi (3 w_x + 2 w_{x+2} - 2 w_{x+1})
            + gamma * psi(tau_x w),
    with psi a fixed local function (independent of gamma and chi).  Returns
    the full residual (should be gamma * psi) and psi = residual / gamma.
    """
    n = len(omega)
    p = ModelParams(n=n, beta=1.0, gamma=gamma)
    phi = LocalObservable.monomial(1.0, {x: 2, (x + 1) % n: 1})
    lphi = apply_generator(phi, omega, p)
    w = lambda k: omega[k % n]
    lines = (3 * w(x) * (w(x + 1)**2 - chi_n)
             + (w(x)**2 - chi_n) * (2 * w(x + 2) - 3 * w(x + 1))
             + (w(x - 1)**2 - chi_n) * w(x + 1)
             - 2 * w(x - 1) * w(x) * w(x + 1)
             + chi_n * (3 * w(x) + 2 * w(x + 2) - 2 * w(x + 1)))
    residual = w(x)**3 - (-lphi) - lines
    return residual, residual / gamma if gamma != 0.0 else math.nan
