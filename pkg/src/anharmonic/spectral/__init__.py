"""Fourier-side machinery: discrete operators, lattice Poisson solutions,
contour-integral residues, scaling diagnostics and reference semigroups."""

from .ops import (
    a_op,
    b_op,
    d_op,
    discrete_ops,
    dtilde_op,
    fourier_grid_1d,
    fourier_grid_2d,
    fourier_n,
    grad1,
    grad_diag,
    grad_tensor_delta,
    lambda_omega_theta,
    lap1,
    lap2,
)
from .poisson import (
    apply_ln_literal,
    apply_ln_sharp,
    defect_report,
    f_hat_grid,
    f_samples,
    gk_of,
    h_grid,
    h_hat_grid,
    poisson_h_hat,
    v_grid,
    v_hat_grid,
    w_from_h,
)
from .residues import (
    g0,
    g0_gn,
    residue_algebra,
    residue_functions,
    residue_quadrature,
    w_weight,
)
from .semigroup import (
    fractional_laplacian_quadrature,
    l_operator_quadrature,
    l_operator_torus,
    line_multiplier_apply,
    multiplier,
    psi_levy,
    semigroup_apply,
    torus_multiplier_apply,
    torus_semigroup,
)
from .suites import (
    cov_identity_check,
    dn_hn_vs_lf,
    l_f_reference,
    phi_hat_suite,
    psi_hat_suite,
    scaling_suite,
    u_n_bound_check,
)
