"""Fluctuating-hydrodynamics coupling constants at zero tension.

For a general even single-site potential V (default the quartic u^4/4) the
one-site measure is exp(-beta*(u^2/2 + gamma*V(u) + tau*u))/Z.  The tension
tau(v, e) is the thermodynamic conjugate map; its first and second derivatives
with respect to mean volume v and mean energy e feed the mode-coupling
matrices G^1, G^2 that decide the universality class of the sound and heat
modes.

All derivatives are evaluated analytically through the cumulant derivation
rules (no finite differences in the production path); the building blocks are
joint cumulants of Y, Y^2 + 2*gamma*V(Y) computed by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

_QUAD_EPSREL = 1e-12
_QUAD_EPSABS = 1e-14


def quartic(u):
    """Default interaction potential V(u) = u^4/4."""
    return 0.25 * u**4


class SiteMeasure:
    """One-site measure exp(-beta*(u^2/2 + gamma*V(u) + tau*u))/Z."""

    def __init__(self, beta: float, tau: float, gamma: float,
                 V: Callable = quartic):
        if beta <= 0:
            raise ValueError("beta must be positive")
        if gamma < 0:
            raise ValueError("gamma must be >= 0")
        self.beta, self.tau, self.gamma, self.V = beta, tau, gamma, V
        self._z = self._quad(lambda u: math.exp(self._logw(u)))

    def _logw(self, u: float) -> float:
        return -self.beta * (0.5 * u * u + self.gamma * self.V(u) + self.tau * u)

    @staticmethod
    def _quad(f):
        val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=_QUAD_EPSABS,
                                epsrel=_QUAD_EPSREL, limit=200)
        return val

    def mean(self, f: Callable) -> float:
        return self._quad(lambda u: f(u) * math.exp(self._logw(u))) / self._z

    def cum2(self, f: Callable, g: Callable) -> float:
        return self.mean(lambda u: f(u) * g(u)) - self.mean(f) * self.mean(g)

    def cum3(self, f: Callable, g: Callable, h: Callable) -> float:
        mf, mg, mh = self.mean(f), self.mean(g), self.mean(h)
        return (self.mean(lambda u: f(u) * g(u) * h(u))
                - mf * self.cum2(g, h) - mg * self.cum2(f, h) - mh * self.cum2(f, g)
                - mf * mg * mh)

    # observables used throughout
    def energy(self, u):
        return 0.5 * u * u + self.gamma * self.V(u)

    def x2(self, u):
        """X = Y^2 + 2*gamma*V(Y) = 2*e(Y)."""
        return u * u + 2.0 * self.gamma * self.V(u)


def gamma_function(beta: float, tau: float, gamma: float,
                   V: Callable = quartic) -> float:
    """Gamma = beta * (<Y;Y><e;e> - <Y;e>^2), the Jacobian factor of (v,e)."""
    m = SiteMeasure(beta, tau, gamma, V)
    Y = lambda u: u
    yy = m.cum2(Y, Y)
    ee = m.cum2(m.energy, m.energy)
    ye = m.cum2(Y, m.energy)
    return beta * (yy * ee - ye * ye)


def tension_derivatives(beta: float, tau: float, gamma: float,
                        V: Callable = quartic) -> dict:
    """First derivatives of tau(v, e):

        dtau/dv = -(1/4 Gamma) <X; X + 2 tau Y>
        dtau/de =  (1/2 Gamma) <Y; X + 2 tau Y>,      X = Y^2 + 2 gamma V.

    At tau = 0 the second one vanishes by parity.
    """
    m = SiteMeasure(beta, tau, gamma, V)
    G = gamma_function(beta, tau, gamma, V)
    Y = lambda u: u
    Xt = lambda u: m.x2(u) + 2.0 * tau * u
    return {
        "gamma_function": G,
        "dtau_dv": -m.cum2(m.x2, Xt) / (4.0 * G),
        "dtau_de": m.cum2(Y, Xt) / (2.0 * G),
    }


@dataclass
class CouplingConstants:
    """Coupling data of the two hydrodynamic modes at tau = 0."""
    beta: float
    gamma: float
    gamma_function: float
    dtau_dv: float
    dtau_de: float
    d2tau_vv: float
    d2tau_ve: float
    d2tau_ev: float
    d2tau_ee: float
    c: float
    Z1: float
    Z2: float
    Z1_tilde: float
    Z2_tilde: float
    psi1: np.ndarray = field(repr=False)
    psi2: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    Hv: np.ndarray = field(repr=False)
    He: np.ndarray = field(repr=False)
    G1: np.ndarray = field(repr=False)
    G2: np.ndarray = field(repr=False)


def coupling_constants(beta: float, gamma: float,
                       V: Callable = quartic) -> CouplingConstants:
    """All coupling data at tau = 0.

    The second derivatives of tau(v,e) are obtained by inverting the 2x2
    Jacobian of (v,e) as functions of (tau,beta):

        d2tau_vv = 0 and d2tau_ee = 0 identically,
        d2tau_ve = dtau(dtau_de)/dtau_v',  d2tau_ev = dbeta(dtau_dv)/dbeta_e',

    every parameter derivative of a cumulant being expanded with the
    derivation rules.
    """
    m = SiteMeasure(beta, 0.0, gamma, V)
    Y = lambda u: u
    X = m.x2
    e = m.energy

    yy = m.cum2(Y, Y)
    xx = m.cum2(X, X)
    yyx = m.cum3(Y, Y, X)
    xxx = m.cum3(X, X, X)

    G = beta * yy * (xx / 4.0)            # <Y;e>=0 at tau=0, <e;e>=<X;X>/4
    dtau_dv = -xx / (4.0 * G)
    dtau_de = 0.0

    # Jacobian of (v,e) wrt (tau,beta) at tau=0 (off-diagonals vanish):
    dv_dtau = -beta * yy
    de_dbeta = -xx / 4.0

    # tau-derivative of dtau/de at tau=0
    dtau_of_dtau_de = yy / G - beta * yyx / (2.0 * G)
    # beta-derivative of dtau/dv at tau=0
    dbeta_G = G / beta + (beta / 8.0) * (-yyx * xx - yy * xxx)
    dbeta_inv_G = -dbeta_G / G**2
    dbeta_of_dtau_dv = -0.25 * dbeta_inv_G * xx + xxx / (8.0 * G)

    d2tau_ve = dtau_of_dtau_de / dv_dtau     # d/dv of dtau/de
    d2tau_ev = dbeta_of_dtau_dv / de_dbeta   # d/de of dtau/dv

    c = 2.0 * dtau_dv
    Z1 = -math.sqrt(-beta * c / 2.0)
    Z2 = math.sqrt(-c / (2.0 * G))
    Z1t = math.sqrt(-c / (2.0 * beta))
    Z2t = math.sqrt(-G * c / 2.0)

    psi1 = np.array([1.0, 0.0]) / Z1                   # (1, -tau)/Z1
    psi2 = np.array([dtau_de, -dtau_dv]) / Z2
    R = np.array([[dtau_dv / Z1t, dtau_de / Z1t],
                  [0.0, 1.0 / Z2t]])                   # tau = 0 row

    Hv = 2.0 * np.array([[0.0, d2tau_ve],
                         [d2tau_ve, 0.0]])             # d2tau_vv = d2tau_ee = 0
    He = -2.0 * np.array([[dtau_dv**2, dtau_dv * dtau_de],
                          [dtau_dv * dtau_de, dtau_de**2]])   # -tau*Hv drops

    def mode_matrix(r_v: float, r_e: float) -> np.ndarray:
        out = np.empty((2, 2))
        for i, pa in enumerate((psi1, psi2)):
            for j, pb in enumerate((psi1, psi2)):
                out[i, j] = 0.5 * (r_v * pa @ Hv @ pb + r_e * pa @ He @ pb)
        return out

    G1 = mode_matrix(R[0, 0], R[0, 1])
    G2 = mode_matrix(R[1, 0], R[1, 1])

    return CouplingConstants(
        beta=beta, gamma=gamma, gamma_function=G,
        dtau_dv=dtau_dv, dtau_de=dtau_de,
        d2tau_vv=0.0, d2tau_ve=d2tau_ve, d2tau_ev=d2tau_ev, d2tau_ee=0.0,
        c=c, Z1=Z1, Z2=Z2, Z1_tilde=Z1t, Z2_tilde=Z2t,
        psi1=psi1, psi2=psi2, R=R, Hv=Hv, He=He, G1=G1, G2=G2,
    )


def classify_universality(g1_22: float, g2_11: float,
                          tol: float = 1e-6) -> str:
    """Mode-coupling classification from the two decisive couplings.

    Returns one of:
      'diffusive-sound/levy-3/2-heat'   (G1_22 = 0, G2_11 != 0)
      'diffusive-sound/diffusive-heat'  (G1_22 = 0, G2_11 = 0)
      'gold-levy'                       (G1_22 != 0, G2_11 != 0)
      'levy-3/2-sound/diffusive-heat'   (G1_22 != 0, G2_11 = 0)
    """
    z1 = abs(g1_22) <= tol
    z2 = abs(g2_11) <= tol
    if z1 and not z2:
        return "diffusive-sound/levy-3/2-heat"
    if z1 and z2:
        return "diffusive-sound/diffusive-heat"
    if not z1 and not z2:
        return "gold-levy"
    return "levy-3/2-sound/diffusive-heat"
