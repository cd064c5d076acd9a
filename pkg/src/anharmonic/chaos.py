"""Polynomial chaos over the product equilibrium measure.

Single-site orthogonal polynomials H_k under W(du) ∝ exp(-e_gamma(u)) du are
built by Gram-Schmidt with quadrature inner products; products over occupation
configurations sigma give the chaos basis H_sigma with norm
N_gamma(sigma) = prod_x norms[sigma_x].  The exchange noise acts on chaos
coefficients by (S Phi)(sigma) = sum_x (Phi(sigma^{x,x+1}) - Phi(sigma)), and
its quadratic (Dirichlet) form and the associated H_{-1,z} Fourier bound for
two-site coefficients are computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy import integrate

from .params import ModelParams
from . import equilibrium

MAX_K = 8

# An Occupation is a frozen sorted tuple of (site, multiplicity>0) pairs.
Occupation = Tuple[Tuple[int, int], ...]


def occupation(d: Dict[int, int]) -> Occupation:
    """Canonical occupation from a site -> multiplicity mapping."""
    items = tuple(sorted((x, m) for x, m in d.items() if m != 0))
    if any(m < 0 for _, m in items):
        raise ValueError("multiplicities must be >= 0")
    return items


def degree(sigma: Occupation) -> int:
    return sum(m for _, m in sigma)


def swap_sites(sigma: Occupation, x: int) -> Occupation:
    """sigma^{x,x+1}: exchange the occupation numbers of sites x and x+1."""
    d = dict(sigma)
    a, b = d.get(x, 0), d.get(x + 1, 0)
    d[x], d[x + 1] = b, a
    return occupation(d)


@dataclass
class OrthoBasis:
    """Orthogonal polynomials H_0..H_kmax under W ∝ exp(-e_gamma(u))du."""
    gamma: float
    coeffs: list          # coeffs[k]: ascending monomial coefficients of H_k
    norms: np.ndarray     # norms[k] = <H_k^2>_W


def build_basis(gamma: float, kmax: int = MAX_K) -> OrthoBasis:
    """Gram-Schmidt on (1, u, u^2, ...) with quadrature inner products."""
    if kmax > MAX_K:
        raise ValueError(f"kmax must be <= {MAX_K}")
    p = ModelParams(beta=1.0, tau=0.0, gamma=gamma)

    def inner(a, b):
        return equilibrium.poly_expectation(np.convolve(a, b), p)

    polys = []
    for k in range(kmax + 1):
        mono = np.zeros(k + 1)
        mono[k] = 1.0
        h = mono
        for q in polys:
            c = inner(mono, q) / inner(q, q)
            h = h - c * np.pad(q, (0, len(h) - len(q)))
        polys.append(h)

    norms = np.array([inner(h, h) for h in polys])
    # orthogonality audit
    worst = max((abs(inner(polys[j], polys[k]))
                 for j in range(kmax + 1) for k in range(j)), default=0.0)
    if worst > 1e-8:
        raise ArithmeticError(f"loss of orthogonality: {worst:.2e}")
    return OrthoBasis(gamma=gamma, coeffs=polys, norms=norms)


def poly_norm(sigma: Occupation, basis: OrthoBasis) -> float:
    """N_gamma(sigma) = prod_x <H_{sigma_x}^2>_W (empty product = 1)."""
    out = 1.0
    for _, m in sigma:
        if m >= len(basis.norms):
            raise ValueError(f"multiplicity {m} exceeds basis kmax")
        out *= basis.norms[m]
    return out


# ---------------------------------------------------------------------------
# exchange noise on chaos coefficients
# ---------------------------------------------------------------------------

Chaos = Dict[Occupation, float]


def _active_bonds(sigma: Occupation):
    """Bonds x whose swap changes sigma (finite: edges of occupied stretches)."""
    if not sigma:
        return
    sites = {x for x, _ in sigma}
    lo, hi = min(sites), max(sites)
    d = dict(sigma)
    for x in range(lo - 1, hi + 1):
        if d.get(x, 0) != d.get(x + 1, 0):
            yield x


def noise_on_chaos(psi: Chaos, x: int) -> Chaos:
    """Coefficients of Psi composed with the (x, x+1) exchange."""
    out: Chaos = {}
    for sigma, v in psi.items():
        out[swap_sites(sigma, x)] = out.get(swap_sites(sigma, x), 0.0) + v
    return {s: v for s, v in out.items() if v != 0.0}


def carre(psi: Chaos) -> Chaos:
    """(S Psi)(sigma) = sum_x (Psi(sigma^{x,x+1}) - Psi(sigma))."""
    # closure of the support under single swaps
    closure = set(psi)
    for sigma in psi:
        for x in _active_bonds(sigma):
            closure.add(swap_sites(sigma, x))
    out: Chaos = {}
    for sigma in closure:
        total = 0.0
        base = psi.get(sigma, 0.0)
        for x in _active_bonds(sigma):
            total += psi.get(swap_sites(sigma, x), 0.0) - base
        if total != 0.0:
            out[sigma] = total
    return out


def dirichlet_form(psi: Chaos, basis: OrthoBasis,
                   weighted: bool = True) -> float:
    """(1/2) sum_x sum_sigma N_gamma(sigma) [Psi(sigma^{x,x+1}) - Psi(sigma)]^2.

    With weighted=False the norm weight N_gamma is replaced by 1 (the
    asymptotically-constant normalization used in the two-site lemma).
    """
    closure = set(psi)
    for sigma in psi:
        for x in _active_bonds(sigma):
            closure.add(swap_sites(sigma, x))
    total = 0.0
    for sigma in closure:
        w = poly_norm(sigma, basis) if weighted else 1.0
        base = psi.get(sigma, 0.0)
        for x in _active_bonds(sigma):
            diff = psi.get(swap_sites(sigma, x), 0.0) - base
            if diff != 0.0:
                total += 0.5 * w * diff * diff
    return total


def chaos_from_two_site(F: Dict[Tuple[int, int], float],
                        p: int = 3, q: int = 1) -> Chaos:
    """Chaos coefficients Phi(p*delta_x + q*delta_y) = F(x, y), x != y."""
    psi: Chaos = {}
    for (x, y), v in F.items():
        if x == y:
            raise ValueError("F must vanish on the diagonal")
        sigma = occupation({x: p, y: q})
        psi[sigma] = psi.get(sigma, 0.0) + v
    return psi


# ---------------------------------------------------------------------------
# diagonal extension and the flat Dirichlet form D0
# ---------------------------------------------------------------------------

def extend_and_d0(F: Dict[Tuple[int, int], float]) -> tuple[dict, float]:
    """Extend off-diagonal F to G with harmonic diagonal and compute D0(G).

    G = F off the diagonal; G(x,x) = (1/4) sum_{|e|=1} G((x,x)+e).  The four
    lattice neighbours of a diagonal point are off-diagonal, so the fill is an
    explicit average.  D0 = sum over a window covering support+2 of
    sum_{|e|=1} (G(.+e) - G)^2.
    """
    for (x, y), v in F.items():
        if x == y and v != 0.0:
            raise ValueError("F must vanish on the diagonal")
    G = {k: v for k, v in F.items() if v != 0.0}
    if not G:
        return {}, 0.0
    xs = [x for (x, y) in G] + [y for (x, y) in G]
    lo, hi = min(xs) - 2, max(xs) + 2
    for x in range(lo, hi + 1):
        dv = 0.25 * (F.get((x + 1, x), 0.0) + F.get((x - 1, x), 0.0)
                     + F.get((x, x + 1), 0.0) + F.get((x, x - 1), 0.0))
        if dv != 0.0:
            G[(x, x)] = dv

    d0 = 0.0
    pts = set(G)
    for (x, y) in G:
        for e in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            pts.add((x + e[0], y + e[1]))
    for (x, y) in pts:
        g = G.get((x, y), 0.0)
        for e in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            d0 += (G.get((x + e[0], y + e[1]), 0.0) - g) ** 2
    # the display sums over every (x,y) and all four unit steps, so each
    # undirected edge contributes from both endpoints; keep that convention.
    return G, d0


def h_minus_one_bound(F: Dict[Tuple[int, int], float], z: float) -> float:
    """Integral bound int |F_hat(k,l)|^2 / (z + 4sin^2(pi k) + 4sin^2(pi l)).

    F_hat(k,l) = sum F(x,y) e^{2i pi (kx + ly)} is an exact finite sum; the
    integral over [-1/2,1/2]^2 uses tensor Gauss-Legendre panels, refined
    around the origin when z < 1e-4.
    """
    if z <= 0:
        raise ValueError("z must be positive")
    items = [(x, y, v) for (x, y), v in F.items() if v != 0.0]
    if not items:
        return 0.0
    xs = np.array([i[0] for i in items])
    ys = np.array([i[1] for i in items])
    vs = np.array([i[2] for i in items])

    def integrand(k, l):
        ph = np.exp(2j * np.pi * (np.multiply.outer(k, xs) + np.multiply.outer(l, ys)))
        fhat = ph @ vs
        den = z + 4 * np.sin(np.pi * k) ** 2 + 4 * np.sin(np.pi * l) ** 2
        return np.abs(fhat) ** 2 / den

    def panel(k0, k1, l0, l1, m=48):
        nodes, wts = np.polynomial.legendre.leggauss(m)
        ks = 0.5 * (k1 - k0) * nodes + 0.5 * (k0 + k1)
        ls = 0.5 * (l1 - l0) * nodes + 0.5 * (l0 + l1)
        wk = 0.5 * (k1 - k0) * wts
        wl = 0.5 * (l1 - l0) * wts
        val = 0.0
        for l, w in zip(ls, wl):
            val += w * np.dot(wk, integrand(ks, np.full_like(ks, l)))
        return val

    # dyadic refinement towards the origin where the integrand peaks
    levels = 3 if z >= 1e-4 else max(3, int(math.ceil(-math.log2(z) / 1.5)))
    total = 0.0
    r_out = 0.5
    for _ in range(levels):
        r_in = r_out / 4.0
        # annulus [-r_out,r_out]^2 minus [-r_in,r_in]^2 split into 4 panels
        total += panel(-r_out, r_out, r_in, r_out)
        total += panel(-r_out, r_out, -r_out, -r_in)
        total += panel(-r_out, -r_in, -r_in, r_in)
        total += panel(r_in, r_out, -r_in, r_in)
        r_out = r_in
    total += panel(-r_out, r_out, -r_out, r_out, m=64)
    return total
