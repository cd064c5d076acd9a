import math

import numpy as np
import pytest
from scipy import integrate

from anharmonic import chaos


def test_gaussian_basis_norms_are_factorials():
    basis = chaos.build_basis(0.0, kmax=6)
    for k in range(7):
        assert basis.norms[k] == pytest.approx(math.factorial(k), rel=1e-9)


def test_anharmonic_basis_orthogonality_audit_passes():
    basis = chaos.build_basis(0.3, kmax=6)
    assert np.all(basis.norms > 0)


def test_occupation_canonical_form():
    assert chaos.occupation({3: 1, 0: 2, 5: 0}) == ((0, 2), (3, 1))
    assert chaos.degree(((0, 2), (3, 1))) == 3
    assert chaos.swap_sites(((0, 2),), 0) == ((1, 2),)


def test_noise_sum_rule():
    psi = chaos.chaos_from_two_site({(0, 1): 1.0, (2, 0): -0.5, (1, 3): 0.25})
    spsi = chaos.carre(psi)
    assert abs(sum(spsi.values())) < 1e-12


def test_noise_self_adjoint_flat_inner_product():
    psi = chaos.chaos_from_two_site({(0, 1): 1.0, (2, 0): -0.5})
    phi = chaos.chaos_from_two_site({(1, 0): 0.7, (0, 2): 1.3})
    spsi = chaos.carre(psi)
    sphi = chaos.carre(phi)
    lhs = sum(phi.get(s, 0.0) * v for s, v in spsi.items())
    rhs = sum(psi.get(s, 0.0) * v for s, v in sphi.items())
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert lhs != 0.0


def test_dirichlet_form_quadratic_and_positive():
    basis = chaos.build_basis(0.1, kmax=4)
    psi = chaos.chaos_from_two_site({(0, 1): 1.0, (2, 0): -0.5})
    d1 = chaos.dirichlet_form(psi, basis)
    d2 = chaos.dirichlet_form({s: 3.0 * v for s, v in psi.items()}, basis)
    assert d1 > 0.0
    assert d2 == pytest.approx(9.0 * d1, rel=1e-12)


def test_diagonal_extension_is_harmonic_average():
    F = {(0, 1): 2.0, (1, 0): 2.0}
    G, d0 = chaos.extend_and_d0(F)
    assert G[(0, 0)] == pytest.approx(1.0)  # (2 + 2 + 0 + 0)/4
    assert G[(1, 1)] == pytest.approx(1.0)
    assert d0 > 0.0


def test_h_minus_one_bound_matches_direct_quadrature():
    F = {(0, 1): 1.0}
    z = 1.0
    direct, _ = integrate.dblquad(
        lambda l, k: 1.0 / (z + 4 * math.sin(math.pi * k) ** 2
                            + 4 * math.sin(math.pi * l) ** 2),
        -0.5, 0.5, -0.5, 0.5, epsabs=1e-10, epsrel=1e-10)
    assert chaos.h_minus_one_bound(F, z) == pytest.approx(direct, rel=1e-7)


def test_h_minus_one_bound_monotone_in_z():
    F = {(0, 1): 1.0, (1, 3): -2.0}
    vals = [chaos.h_minus_one_bound(F, z) for z in (1e-3, 1e-2, 1e-1, 1.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
