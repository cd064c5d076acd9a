"""Single-site equilibrium structure of the anharmonic chain.

The product measure has one-site density

    rho(u) = exp(-beta*e(u) - lam*u) / Z,   e(u) = u^2/2 + gamma*u^4/4,

with lam = tau*beta.  Everything thermodynamic (moments, cumulants, the
kurtosis ratio kappa, the derivative rules that trade parameter derivatives of
expectations for joint cumulants) lives here.  Moments come from adaptive
quadrature; the sampler is exact rejection from a Gaussian proposal.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .params import ModelParams

_QUAD_EPSREL = 1e-12
_QUAD_EPSABS = 1e-14
MAX_MOMENT = 16

# cache of log-normalisations and moments keyed by (beta, tau, gamma)
_logz_cache: dict[tuple[float, float, float], float] = {}
_moment_cache: dict[tuple[float, float, float, int], float] = {}


def site_energy(u, gamma: float):
    """e_gamma(u) = u^2/2 + gamma*u^4/4 (vectorised)."""
    u = np.asarray(u, dtype=float)
    return 0.5 * u * u + 0.25 * gamma * u**4


def _log_weight(u: np.ndarray, p: ModelParams) -> np.ndarray:
    return -p.beta * site_energy(u, p.gamma) - p.lam * u


def _quad(f: Callable[[float], float]) -> float:
    val, _ = integrate.quad(f, -np.inf, np.inf,
                            epsabs=_QUAD_EPSABS, epsrel=_QUAD_EPSREL, limit=200)
    return val


def log_z(p: ModelParams) -> float:
    """log of the one-site normalisation Z(beta, tau, gamma)."""
    key = (p.beta, p.tau, p.gamma)
    if key not in _logz_cache:
        val = _quad(lambda u: math.exp(-p.beta * site_energy(u, p.gamma) - p.lam * u))
        _logz_cache[key] = math.log(val)
    return _logz_cache[key]


def expectation(f: Callable[[np.ndarray], np.ndarray], p: ModelParams) -> float:
    """<f(omega_0)> under the one-site equilibrium density."""
    lz = log_z(p)
    return _quad(lambda u: f(u) * math.exp(-p.beta * site_energy(u, p.gamma)
                                           - p.lam * u - lz))


def moment(k: int, p: ModelParams) -> float:
    """<omega_0^k>, k <= 16, relative tolerance ~1e-10.

    Odd moments vanish identically at zero tension and are returned as exact
    zeros there.
    """
    if not (0 <= k <= MAX_MOMENT):
        raise ValueError(f"moment order must be in [0, {MAX_MOMENT}], got {k}")
    if k == 0:
        return 1.0
    if k % 2 == 1 and p.lam == 0.0:
        return 0.0
    key = (p.beta, p.tau, p.gamma, k)
    if key not in _moment_cache:
        _moment_cache[key] = expectation(lambda u: u**k, p)
    return _moment_cache[key]


def chi(p: ModelParams) -> float:
    """Static susceptibility chi = <omega_0^2> (the paper's chi_n at tau=0)."""
    return moment(2, p)


def kappa(gamma: float, beta: float = 1.0) -> float:
    """Kurtosis ratio kappa(gamma) = <u^4>_W / <u^2>_W.

    W is the zero-tension weight exp(-beta*e_gamma(u)) du with beta defaulting
    to 1 (the convention used throughout the dynamics).  kappa(0) = 3 and
    kappa is decreasing in gamma.
    """
    p = ModelParams(beta=beta, tau=0.0, gamma=gamma)
    return moment(4, p) / moment(2, p)


# ---------------------------------------------------------------------------
# polynomial observables: exact cumulant assembly from moments
# ---------------------------------------------------------------------------

def poly_expectation(coeffs: Sequence[float], p: ModelParams) -> float:
    """<P(omega_0)> for P given by ascending power coefficients."""
    return sum(c * moment(k, p) for k, c in enumerate(coeffs) if c != 0.0)


def _poly_mul(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    return np.convolve(np.asarray(a, float), np.asarray(b, float))


def poly_joint_cumulant(polys: Sequence[Sequence[float]], p: ModelParams) -> float:
    """Joint cumulant of up to three polynomial observables of omega_0."""
    ms = [poly_expectation(c, p) for c in polys]
    if len(polys) == 1:
        return ms[0]
    if len(polys) == 2:
        m12 = poly_expectation(_poly_mul(polys[0], polys[1]), p)
        return m12 - ms[0] * ms[1]
    if len(polys) == 3:
        a, b, c = polys
        mab = poly_expectation(_poly_mul(a, b), p)
        mac = poly_expectation(_poly_mul(a, c), p)
        mbc = poly_expectation(_poly_mul(b, c), p)
        mabc = poly_expectation(_poly_mul(_poly_mul(a, b), c), p)
        return (mabc - ms[0] * mbc - ms[1] * mac - ms[2] * mab
                + 2.0 * ms[0] * ms[1] * ms[2])
    raise ValueError("joint cumulants implemented for at most 3 observables")


def joint_cumulant(observables: Sequence[Callable], p: ModelParams) -> float:
    """Joint cumulant <A>, <A;B> or <A;B;C> of callable one-site observables."""
    ms = [expectation(f, p) for f in observables]
    if len(observables) == 1:
        return ms[0]
    if len(observables) == 2:
        a, b = observables
        return expectation(lambda u: a(u) * b(u), p) - ms[0] * ms[1]
    if len(observables) == 3:
        a, b, c = observables
        mab = expectation(lambda u: a(u) * b(u), p)
        mac = expectation(lambda u: a(u) * c(u), p)
        mbc = expectation(lambda u: b(u) * c(u), p)
        mabc = expectation(lambda u: a(u) * b(u) * c(u), p)
        return (mabc - ms[0] * mbc - ms[1] * mac - ms[2] * mab
                + 2.0 * ms[0] * ms[1] * ms[2])
    raise ValueError("joint cumulants implemented for at most 3 observables")


def equilibrium_summary(p: ModelParams) -> dict:
    """Mean energy, mean volume, susceptibility, kurtosis ratio and log Z."""
    e_mean = expectation(lambda u: site_energy(u, p.gamma), p)
    v_mean = moment(1, p)
    return {
        "e_mean": e_mean,
        "v_mean": v_mean,
        "chi": moment(2, p) - v_mean**2,
        "kappa": kappa(p.gamma, p.beta),
        "log_z": log_z(p),
    }


# ---------------------------------------------------------------------------
# derivation rules: parameter derivatives of expectations == joint cumulants
# ---------------------------------------------------------------------------

def _quartic(u):
    return 0.25 * u**4


def verify_derivation_rules(p: ModelParams, observable: Callable,
                            delta: float = 1e-4) -> dict:
    """Check the cumulant derivation rules against central finite differences.

    First order:
        d<A>/dgamma = -beta <A; V>          with V(u) = u^4/4
        d<A>/dtau   = -beta <A; omega>
        d<A>/dbeta  =      -<A; e + tau*omega>
    Second order: the corresponding mixed rules obtained by differentiating
    once more.  Returns {rule: (fd_value, cumulant_value, abs_err)}.
    """
    A = observable
    beta, tau, gamma = p.beta, p.tau, p.gamma

    def mean(b, t, g):
        return expectation(A, ModelParams(beta=b, tau=t, gamma=g))

    def etau(u):
        return site_energy(u, gamma) + tau * u

    out = {}

    def fd1(fn, x0):
        return (fn(x0 + delta) - fn(x0 - delta)) / (2 * delta)

    def fd2(fn, x0):
        return (fn(x0 + delta) - 2 * fn(x0) + fn(x0 - delta)) / delta**2

    # first order -----------------------------------------------------------
    lhs = fd1(lambda g: mean(beta, tau, g), gamma)
    rhs = -beta * joint_cumulant([A, _quartic], p)
    out["d_gamma"] = (lhs, rhs, abs(lhs - rhs))

    lhs = fd1(lambda t: mean(beta, t, gamma), tau)
    rhs = -beta * joint_cumulant([A, lambda u: u], p)
    out["d_tau"] = (lhs, rhs, abs(lhs - rhs))

    lhs = fd1(lambda b: mean(b, tau, gamma), beta)
    rhs = -joint_cumulant([A, etau], p)
    out["d_beta"] = (lhs, rhs, abs(lhs - rhs))

    # second order ----------------------------------------------------------
    lhs = fd2(lambda g: mean(beta, tau, g), gamma)
    rhs = beta**2 * joint_cumulant([A, _quartic, _quartic], p)
    out["d_gamma_gamma"] = (lhs, rhs, abs(lhs - rhs))

    lhs = fd2(lambda t: mean(beta, t, gamma), tau)
    rhs = beta**2 * joint_cumulant([A, lambda u: u, lambda u: u], p)
    out["d_tau_tau"] = (lhs, rhs, abs(lhs - rhs))

    lhs = fd2(lambda b: mean(b, tau, gamma), beta)
    rhs = joint_cumulant([A, etau, etau], p)
    out["d_beta_beta"] = (lhs, rhs, abs(lhs - rhs))

    lhs = (mean(beta, tau + delta, gamma + delta) - mean(beta, tau + delta, gamma - delta)
           - mean(beta, tau - delta, gamma + delta) + mean(beta, tau - delta, gamma - delta)
           ) / (4 * delta**2)
    rhs = beta**2 * joint_cumulant([A, _quartic, lambda u: u], p)
    out["d_gamma_tau"] = (lhs, rhs, abs(lhs - rhs))

    lhs = (mean(beta + delta, tau, gamma + delta) - mean(beta + delta, tau, gamma - delta)
           - mean(beta - delta, tau, gamma + delta) + mean(beta - delta, tau, gamma - delta)
           ) / (4 * delta**2)
    rhs = (-joint_cumulant([A, _quartic], p)
           + beta * joint_cumulant([A, _quartic, etau], p))
    out["d_gamma_beta"] = (lhs, rhs, abs(lhs - rhs))

    lhs = (mean(beta + delta, tau + delta, gamma) - mean(beta + delta, tau - delta, gamma)
           - mean(beta - delta, tau + delta, gamma) + mean(beta - delta, tau - delta, gamma)
           ) / (4 * delta**2)
    rhs = (-joint_cumulant([A, lambda u: u], p)
           + beta * joint_cumulant([A, lambda u: u, etau], p))
    out["d_tau_beta"] = (lhs, rhs, abs(lhs - rhs))

    return out


# ---------------------------------------------------------------------------
# exact sampling
# ---------------------------------------------------------------------------

def sample_sites(p: ModelParams, size: int, rng: np.random.Generator,
                 max_rounds: int = 1000) -> np.ndarray:
    """Draw iid sites from the one-site density by rejection.

    Proposal: the gamma=0 Gaussian N(-tau, 1/beta); acceptance probability
    exp(-beta*gamma*u^4/4) <= 1, so the sample is exact.
    """
    out = np.empty(size)
    filled = 0
    for _ in range(max_rounds):
        need = size - filled
        if need == 0:
            break
        m = max(64, int(1.2 * need))
        u = rng.normal(-p.tau, 1.0 / math.sqrt(p.beta), size=m)
        acc = rng.random(m) < np.exp(-p.beta * p.gamma * u**4 / 4.0)
        got = u[acc][:need]
        out[filled:filled + len(got)] = got
        filled += len(got)
    if filled < size:
        raise RuntimeError("rejection sampler failed to fill the request "
                           f"({filled}/{size}); acceptance rate too low")
    return out
