import numpy as np
import pytest

from anharmonic import dynamics, equilibrium, identities
from anharmonic.params import ModelParams


def _random_state(n, gamma, seed):
    rng = np.random.default_rng(seed)
    return dynamics.LatticeState(rng.normal(size=n), gamma=gamma), rng


def test_drift_conserves_volume_and_energy():
    state, rng = _random_state(64, 0.2, 0)
    w = state.omega
    dw = dynamics.drift(w, 0.2)
    assert np.sum(dw) == pytest.approx(0.0, abs=1e-12)
    # dE/dt = sum (w + gamma w^3) dw/dt vanishes by antisymmetry
    g = w + 0.2 * w ** 3
    assert float(g @ dw) == pytest.approx(0.0, abs=1e-10)


def test_evolution_conserves_volume_and_energy():
    gamma = 0.15
    state, rng = _random_state(128, gamma, 1)
    p = ModelParams(n=128, beta=1.0, tau=0.0, gamma=gamma, a=1.0)
    v0 = float(np.sum(state.omega))
    e0 = float(np.sum(equilibrium.site_energy(state.omega, gamma)))
    out = dynamics.evolve(state, 25.0, p, rng)
    assert float(np.sum(out.omega)) == pytest.approx(v0, rel=1e-8, abs=1e-8)
    e1 = float(np.sum(equilibrium.site_energy(out.omega, gamma)))
    assert e1 == pytest.approx(e0, rel=1e-6)
    # the state actually moved
    assert not np.allclose(out.omega, state.omega)


def test_evolution_is_deterministic_given_rng_stream():
    gamma = 0.1
    p = ModelParams(n=64, beta=1.0, tau=0.0, gamma=gamma, a=1.0)
    outs = []
    for _ in range(2):
        state = dynamics.LatticeState(
            np.random.default_rng(3).normal(size=64), gamma=gamma)
        out = dynamics.evolve(state, 10.0, p, np.random.default_rng(11))
        outs.append(out.omega.copy())
    np.testing.assert_array_equal(outs[0], outs[1])


def test_swap_exchanges_neighbours():
    state, _ = _random_state(16, 0.0, 2)
    w = state.omega.copy()
    out = dynamics.swap(state, 5)
    assert out.omega[5] == w[6] and out.omega[6] == w[5]
    mask = np.ones(16, bool)
    mask[[5, 6]] = False
    np.testing.assert_array_equal(out.omega[mask], w[mask])


def test_local_observable_derivative():
    phi = dynamics.LocalObservable.monomial(2.0, {0: 2, 1: 1})
    rng = np.random.default_rng(4)
    w = rng.normal(size=8)
    eps = 1e-6
    for z in (0, 1, 2):
        wp = w.copy(); wp[z] += eps
        wm = w.copy(); wm[z] -= eps
        fd = (phi.evaluate(wp) - phi.evaluate(wm)) / (2 * eps)
        assert phi.derivative(z).evaluate(w) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_generator_identities_on_random_states():
    out = identities.identity_suite(n=24, n_states=25, seed=5, gamma=0.07)
    assert out["volume"] <= 1e-11
    assert out["energy"] <= 1e-11
    assert out["quadratic"] <= 1e-11
    assert out["omega3"] <= 1e-9


def test_omega3_residual_scales_with_gamma():
    rng = np.random.default_rng(6)
    w = rng.normal(size=32)
    r1, n1 = dynamics.omega3_residual(w, 4, 1e-3, chi_n=1.2)
    r2, n2 = dynamics.omega3_residual(w, 4, 1e-4, chi_n=1.2)
    # the residual is O(gamma): normalized values agree across a decade
    assert n1 == pytest.approx(n2, rel=1e-2)
    assert abs(r2) < abs(r1)
