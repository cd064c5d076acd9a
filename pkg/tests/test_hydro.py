import math

import numpy as np
import pytest

from anharmonic import hydro


def test_harmonic_point_closed_forms():
    cc = hydro.coupling_constants(1.0, 0.0)
    assert cc.c == pytest.approx(-2.0, abs=1e-8)
    assert cc.Z1 == pytest.approx(-1.0, abs=1e-8)
    assert cc.Z2 == pytest.approx(math.sqrt(2.0), abs=1e-8)
    assert cc.He[0, 0] == pytest.approx(-2.0, abs=1e-8)
    assert abs(cc.He[0, 1]) < 1e-8 and abs(cc.He[1, 1]) < 1e-8
    assert np.max(np.abs(cc.Hv)) < 1e-8
    assert cc.G2[0, 0] == pytest.approx(-math.sqrt(2.0), abs=1e-8)


@pytest.mark.parametrize("gamma", [0.0, 0.05, 0.1, 0.2])
def test_sound_mode_self_coupling_vanishes(gamma):
    cc = hydro.coupling_constants(1.0, gamma)
    assert abs(cc.G1[1, 1]) < 1e-6
    label = hydro.classify_universality(cc.G1[1, 1], cc.G2[0, 0])
    assert label == "diffusive-sound/levy-3/2-heat"


@pytest.mark.parametrize("gamma", [0.0, 0.1])
@pytest.mark.parametrize("beta", [0.8, 1.0, 1.5])
def test_mode_normalization_duality(beta, gamma):
    cc = hydro.coupling_constants(beta, gamma)
    # the tilde normalizations are dual: Z Z~ = c/2 for both modes
    assert cc.Z1 * cc.Z1_tilde == pytest.approx(cc.c / 2.0, rel=1e-10)
    assert cc.Z2 * cc.Z2_tilde == pytest.approx(-cc.c / 2.0, rel=1e-10)
    assert cc.c < 0.0
    assert cc.gamma_function > 0.0


def test_tension_derivative_against_finite_difference():
    gamma, beta = 0.1, 1.0
    d = hydro.tension_derivatives(beta, 0.0, gamma)
    # finite difference of v(tau) = <u>_tau around tau = 0
    eps = 1e-4
    mp = hydro.SiteMeasure(beta, +eps, gamma)
    mm = hydro.SiteMeasure(beta, -eps, gamma)
    dv_dtau = (mp.mean(lambda u: u) - mm.mean(lambda u: u)) / (2 * eps)
    assert d["dtau_dv"] == pytest.approx(1.0 / dv_dtau, rel=1e-5)


def test_classification_cases():
    assert hydro.classify_universality(0.0, 1.0) == "diffusive-sound/levy-3/2-heat"
    assert hydro.classify_universality(0.0, 0.0) == "diffusive-sound/diffusive-heat"
    assert hydro.classify_universality(1.0, 1.0) == "gold-levy"
    assert hydro.classify_universality(1.0, 0.0) == "levy-3/2-sound/diffusive-heat"
