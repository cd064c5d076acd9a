"""Acceptance gate: twelve end-to-end criteria, one pass/fail line each.

Statistical criteria (9-11) run the production Monte Carlo experiments at
their pinned parameters; their wall-clock budgets are stated for 8 cores and
are scaled by the number of cores actually available.
"""

import math
import os
import time

import numpy as np
import pytest

from conftest import record

from anharmonic import equilibrium, hydro
from anharmonic.params import ModelParams
from anharmonic.fields import TestFunction
from anharmonic import identities
from anharmonic.spectral import residues as spectral_residues
from anharmonic.spectral.poisson import defect_report
from anharmonic.spectral.suites import dn_hn_vs_lf, scaling_suite
from anharmonic.harness import experiments
from anharmonic.harness.config import ExperimentConfig
from anharmonic.harness.report import to_csv


_NCORES = os.cpu_count() or 1


def _budget(seconds_on_8_cores: float) -> float:
    return seconds_on_8_cores * 8.0 / _NCORES


def _finish(name: str, ok: bool, detail: str, started: float = None,
            budget: float = None):
    if started is not None:
        wall = time.time() - started
        within = budget is None or wall <= budget
        detail += f"; wall {wall:.1f}s" + (
            "" if budget is None else f" (budget {budget:.0f}s on {_NCORES} cores)")
        ok = ok and within
    record(("PASS " if ok else "FAIL ") + f"{name}  [{detail}]")
    assert ok, f"{name}: {detail}"


def _run(cfg: ExperimentConfig):
    cfg.validate()
    return experiments.run(cfg)


def _check_summary(report):
    bad = [c for c in report.checks if not c.passed]
    ok = not bad
    detail = "; ".join(f"{c.name}: {c.detail}" for c in
                       (bad if bad else report.checks))
    return ok, detail


# -- 1. Gaussian cumulant table ---------------------------------------------

def test_criterion_01_gaussian_cumulants():
    start = time.time()
    p = ModelParams(beta=1.0, tau=0.0, gamma=0.0)
    u = [0.0, 1.0]          # identity polynomial
    u2 = [0.0, 0.0, 1.0]    # square polynomial
    table = {
        "<u;u> = 1": (equilibrium.poly_joint_cumulant([u, u], p), 1.0),
        "<u2;u2> = 2": (equilibrium.poly_joint_cumulant([u2, u2], p), 2.0),
        "<u;u;u2> = 2": (equilibrium.poly_joint_cumulant([u, u, u2], p), 2.0),
        "<u2;u2;u2> = 8": (equilibrium.poly_joint_cumulant([u2, u2, u2], p), 8.0),
        "<u4> = 3": (equilibrium.moment(4, p), 3.0),
    }
    err = max(abs(got - want) for got, want in table.values())
    _finish("criterion-1 gaussian-cumulant-table (tol 1e-9)",
            err <= 1e-9, f"max abs error {err:.2e}", start, 1.0)


# -- 2. Weak-coupling expansion slopes ---------------------------------------

def test_criterion_02_expansion_slopes():
    gamma = 1e-3
    p = ModelParams(beta=1.0, tau=0.0, gamma=gamma)
    e_mean = equilibrium.expectation(
        lambda x: equilibrium.site_energy(x, gamma), p)
    slope = (e_mean - 0.5) / gamma
    v_mean = equilibrium.expectation(lambda x: x, p)
    kap0 = equilibrium.kappa(0.0)
    ok = (abs(slope + 0.75) <= 0.02 * 0.75 and abs(v_mean) <= 1e-12
          and abs(kap0 - 3.0) <= 1e-9)
    _finish("criterion-2 expansion-slopes",
            ok, f"(e-1/2)/gamma = {slope:.5f} (target -0.75 within 2%), "
                f"v-mean = {v_mean:.1e}, kappa(0)-3 = {kap0 - 3.0:.1e}")


# -- 3. Coupling constants ----------------------------------------------------

def test_criterion_03_coupling_constants():
    start = time.time()
    cc = hydro.coupling_constants(1.0, 0.0)
    closed = {
        "c": (cc.c, -2.0),
        "Z1": (cc.Z1, -1.0),
        "Z2": (cc.Z2, math.sqrt(2.0)),
        "He00": (cc.He[0][0], -2.0),
        "He11": (cc.He[1][1], 0.0),
        "He01": (cc.He[0][1], 0.0),
        "He10": (cc.He[1][0], 0.0),
        "Hv00": (cc.Hv[0][0], 0.0),
        "Hv11": (cc.Hv[1][1], 0.0),
        "G2_11": (cc.G2[0][0], -math.sqrt(2.0)),
    }
    err = max(abs(got - want) for got, want in closed.values())
    worst_g122 = 0.0
    labels = set()
    for gamma in (0.0, 0.05, 0.1, 0.2):
        cg = hydro.coupling_constants(1.0, gamma)
        worst_g122 = max(worst_g122, abs(cg.G1[1][1]))
        labels.add(hydro.classify_universality(cg.G1[1, 1], cg.G2[0, 0]))
    ok = (err <= 1e-8 and worst_g122 <= 1e-6
          and labels == {"diffusive-sound/levy-3/2-heat"})
    _finish("criterion-3 coupling-constants (1e-8, G1_22 1e-6)",
            ok, f"max closed-form error {err:.2e}, max |G1_22| {worst_g122:.2e}, "
                f"classification {sorted(labels)}", start, 10.0)


# -- 4. Generator identities --------------------------------------------------

def test_criterion_04_generator_identities():
    start = time.time()
    worst = identities.identity_suite(n=32, n_states=100, seed=0, gamma=0.1)
    err = max(v for k, v in worst.items() if k != "omega3")
    ok = err <= 1e-11
    _finish("criterion-4 generator-identities (rel 1e-11, n=32, 100 states)",
            ok, f"max relative residual {err:.2e}", start, 5.0)


# -- 5. Residue calculus ------------------------------------------------------

def test_criterion_05_residues():
    start = time.time()
    rng = np.random.default_rng(5)
    names = ("I", "J", "K", "L", "M", "O")
    worst = 0.0
    worst_k2j = 0.0
    for gk in (1.0, 1.003):
        ys = np.concatenate([rng.uniform(1e-3, 0.5, size=44),
                             [1e-4, 5e-4, 0.1, 0.25, 0.4, 0.49]])
        for y in ys:
            exact = spectral_residues.residue_functions(y, gk)
            quadv = spectral_residues.residue_quadrature(y, gk)
            for nm in names:
                scale = max(abs(quadv[nm]), 1.0)
                worst = max(worst, abs(exact[nm] - quadv[nm]) / scale)
            worst_k2j = max(worst_k2j, abs(exact["K"] - 2.0 * exact["J"]))
    bounds = {"I": 0.5, "J": 1.5, "L": 0.5, "M": 1.5, "O": 1.5}
    worst_ratio = 0.0
    for y in np.geomspace(1e-4, 0.5, 50):
        vals = spectral_residues.residue_functions(y, 1.0)
        sy = abs(math.sin(math.pi * y))
        for nm, expo in bounds.items():
            worst_ratio = max(worst_ratio, abs(vals[nm]) * sy ** expo)
    ok = worst <= 1e-8 and worst_k2j <= 1e-10 and np.isfinite(worst_ratio)
    _finish("criterion-5 residue-calculus (quadrature 1e-8, K=2J)",
            ok, f"max quadrature error {worst:.2e}, max |K-2J| {worst_k2j:.2e}, "
                f"bound-ratio sup {worst_ratio:.3g}", start, 30.0)


# -- 6. Poisson defect --------------------------------------------------------

def test_criterion_06_poisson_defect():
    f = TestFunction.unit_mass(0.0, 0.05)
    worst = max(defect_report(256, f, g)["defect_sharp"] for g in (0.0, 0.05))
    _finish("criterion-6 poisson-defect (l2 rel 1e-8, n=256)",
            worst <= 1e-8, f"max relative defect {worst:.2e}")


# -- 7. Scaling exponents -----------------------------------------------------

def test_criterion_07_scaling_exponents():
    start = time.time()
    f = TestFunction.unit_mass(0.0, 0.05)
    out = scaling_suite([2 ** k for k in range(6, 13)], f,
                        coupling=0.3, b=0.5)
    targets = {
        "h_total": (1.5, 0.1), "h_diag": (1.0, 0.1), "h_d_op": (1.0, 0.1),
        "h_diag_grad": (-1.0, 0.1),
        "v_total": (0.5, 0.15), "v_diag": (0.0, 0.15), "v_d_op": (0.0, 0.15),
        "v_diag_grad": (-2.0, 0.15), "v_dtilde_band": (2.0, 0.15),
    }
    errs = {k: out["slopes"][k] - t for k, (t, _) in targets.items()}
    ok = all(abs(errs[k]) <= tol for k, (_, tol) in targets.items())
    detail = ", ".join(f"{k} {out['slopes'][k]:+.3f} (target {t:+g})"
                       for k, (t, _) in targets.items())
    _finish("criterion-7 scaling-exponents (9 slopes)", ok, detail,
            start, 300.0)


# -- 8. Diagonal-derivative limit ---------------------------------------------

def test_criterion_08_diagonal_derivative_limit():
    f = TestFunction.unit_mass(0.0, 0.05)
    gaps = []
    for k in range(7, 12):
        n = 2 ** k
        gaps.append(dn_hn_vs_lf(n, f, 0.3 * n ** -0.5))
    ratios = [b / a for a, b in zip(gaps, gaps[1:])]
    ok = all(r <= 0.7 for r in ratios)
    consts = [spectral_residues.g0_gn(xi, 1024, 0.3 * 1024 ** -0.5).normalized_error
              for xi in (0.5, 1.0, 2.0, 5.0, 10.0)]
    c_fit = max(consts)
    ok = ok and np.isfinite(c_fit)
    _finish("criterion-8 diagonal-derivative-limit (gap -30%/doubling)",
            ok, f"doubling ratios {[f'{r:.2f}' for r in ratios]}, "
                f"normalized-limit constant {c_fit:.3g}")


# -- 9. Theorem 1 -------------------------------------------------------------

def test_criterion_09_theorem1():
    start = time.time()
    cfg = ExperimentConfig(
        experiment="theorem1", n=256, a=1.0, b=0.0, gamma=1e-2,
        t_grid=(0.05, 0.1, 0.15), replicas=10000, seed=0, centers=17,
        width=0.25, translation_average=False)
    rep = _run(cfg)
    ok1, d1 = _check_summary(rep)
    cfg_half = ExperimentConfig(
        experiment="theorem1", n=256, a=0.5, b=0.0, gamma=1e-2,
        t_grid=(0.0125, 0.025, 0.05), replicas=10000, seed=0, centers=17,
        width=0.25, translation_average=False)
    rep_half = _run(cfg_half)
    ok2, d2 = _check_summary(rep_half)
    _finish("criterion-9 theorem1 (a=1 transport + a=0.5 time-invariance, |z|<=3)",
            ok1 and ok2, f"a=1: {d1} | a=0.5: {d2}", start, 600.0)


# -- 10. Theorem 2 ------------------------------------------------------------

def test_criterion_10_theorem2():
    start = time.time()
    cfg = ExperimentConfig(
        experiment="theorem2", n=128, a=2.0, b=1.0, gamma=1.0,
        t_grid=(0.25,), replicas=5000, seed=0, centers=8, width=0.1)
    rep = _run(cfg)
    ok, detail = _check_summary(rep)
    _finish("criterion-10 theorem2 (heat reference, |z|<=3 at 8 centers)",
            ok, detail, start, 2700.0)


# -- 11. Theorem 3 ------------------------------------------------------------

def test_criterion_11_theorem3():
    start = time.time()
    cfg = ExperimentConfig(
        experiment="theorem3", n=128, a=1.5, b=0.5, gamma=1.0,
        t_grid=(0.2,), replicas=5000, seed=0, centers=17, width=0.05,
        kind="energy")
    rep = _run(cfg)
    ok, detail = _check_summary(rep)
    _finish("criterion-11 theorem3 (levy32 closest + universality)",
            ok, detail, start, 5400.0)


# -- 12. Determinism ----------------------------------------------------------

def test_criterion_12_determinism():
    def run_with(threads):
        cfg = ExperimentConfig(
            experiment="theorem1", n=64, a=1.0, gamma=1e-2, t_grid=(0.05,),
            replicas=100, seed=7, threads=threads, centers=5, width=0.25,
            translation_average=False)
        return to_csv(_run(cfg))

    same = run_with(1) == run_with(2)
    _finish("criterion-12 determinism (byte-identical CSV across --threads)",
            same, "threads 1 vs 2 byte-identical" if same else "CSV differs")
