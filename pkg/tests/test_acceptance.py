"""Acceptance runs A1 to A10 at their stated tolerances."""
import math
import time

import numpy as np
import pytest

from cornerlab import experiments as X
from cornerlab import fem, geometry as G, meshing as M, norms as N, singular as S
from cornerlab.verify import BubbleQuartic, SinSin, manufactured_rates, scaling_deviation

X1_ORACLE = 1.4866047991236893
EPS = X.default_eps(1.0)


def test_a1_manufactured(record):
    t = time.time()
    s1, s0 = manufactured_rates((4, 8, 16, 32, 64))
    dt = time.time() - t
    ok = abs(s1 - 1) <= 0.15 and abs(s0 - 2) <= 0.2 and dt < 30
    record("A1 manufactured solution", ok, f"H1 order {s1:.4f}, L2 order {s0:.4f}, {dt:.1f} s")
    assert ok


def test_a2_h2_identity(record):
    sq = M.rectangle_mesh(8)
    ra = N.h2_identity_residual(SinSin(), sq)
    rb = N.h2_identity_residual(BubbleQuartic(), sq)
    fine = M.rectangle_mesh(64)
    rd = N.h2_identity_residual(fem.interpolate(fine, SinSin(), 2), fine)
    ok = ra <= 1e-10 and rb <= 1e-10 and rd <= 0.02
    record("A2 H2 identity", ok, f"analytic {ra:.2e} / {rb:.2e}, discrete P2 {rd:.2e}")
    assert ok


def test_a3_coefficients(record, lsector):
    fam = G.fig2_family()
    rhs = fem.AnalyticDeltaPhiH1(lsector)
    u0 = X.solve(fam, 0.0, rhs)
    est = [S.extract_coefficient(u0, lsector, j) for j in (1, 2, 3)]
    synth = S.SingularSum(lsector, {1: 3.0, 2: 2.0})
    pa = S.parseval_residual(synth, lsector, 2, 0.5 * lsector.r0)
    pd = S.parseval_residual(fem.interpolate(u0.mesh, synth, 2), lsector, 2, 0.5 * lsector.r0)
    rel_spread = est[0].spread / abs(est[0].value)
    ok = (abs(est[0].value - 1) <= 0.01 and rel_spread <= 0.01 and abs(est[1].value) <= 0.02
          and abs(est[2].value) <= 0.02 and pa <= 1e-8 and pd <= 0.01)
    record("A3 coefficient functional", ok,
           f"c1 {est[0].value:.6f} spread {rel_spread:.1e} c2 {est[1].value:.1e} "
           f"c3 {est[2].value:.1e}; Parseval {pa:.1e} analytic, {pd:.1e} discrete")
    assert ok


def test_a4_fractional_scaling(record):
    devs = {sp: scaling_deviation(*sp) for sp in ((0.5, 2.0), (1.4, 2.0), (0.5, 3.0))}
    mesh = M.rectangle_mesh(16)
    val = N.slobodeckii_seminorm(N.P1Data(mesh, mesh.vertices[:, 0]), 0.5) ** 2
    rel = abs(val - X1_ORACLE) / X1_ORACLE
    ok = max(devs.values()) <= 1e-10 and rel <= 0.02
    record("A4 fractional scaling", ok,
           f"max scaling deviation {max(devs.values()):.1e}, linear oracle rel. error {rel:.1e}")
    assert ok


def test_a5_blowup(record):
    fam = G.fig2_family()
    t = time.time()
    table = X.blowup_sweep(X.SweepConfig(fam, eps=EPS, norms=[(1.75, 2.0), (1.2, 2.0)]))
    dt = time.time() - t
    hi, lo = table.fits[(1.75, 2.0)], table.fits[(1.2, 2.0)]
    ok = (abs(hi.slope + 1 / 12) <= 0.05 and hi.r2 >= 0.98 and abs(lo.slope - (2 / 3 - 0.2)) <= 0.07
          and dt < 600)
    record("A5 blow-up rate", ok,
           f"s=1.75 slope {hi.slope:.4f} (R2 {hi.r2:.4f}), s=1.2 slope {lo.slope:.4f}, {dt:.0f} s")
    assert ok


def test_a6_inner_term(record):
    fam = G.fig2_family()
    fit = X.inner_sweep(fam, eps=EPS).fits["residual"]
    ok = abs(fit.slope - 2 / 3) <= 0.15
    record("A6 leading inner term", ok, f"residual slope {fit.slope:.4f} (R2 {fit.r2:.4f})")
    assert ok


def test_a7_coefficient_scaling(record):
    fam = G.fig2_family()
    table = X.coefficient_sweep(fam, eps=EPS)
    fit = table.fits["d1"]
    sym = X.symmetry_defect(table)
    ok = abs(fit.slope + 2 / 15) <= 0.05 and sym <= 0.01
    record("A7 coefficient scaling", ok, f"|d1| slope {fit.slope:.4f}, symmetry defect {sym:.1e}")
    assert ok


def test_a8_h2_constrained(record):
    fam = G.fig2_family()
    table, res = X.constrained_sweep(fam, eps=EPS)
    ratio = np.asarray(table.columns["ratio"])
    spread = ratio.max() / ratio.min()
    slope = table.fits["c1_over_f"].slope
    ok = spread <= 5 and slope >= 1 / 3 - 0.1 and all(abs(r.d_matrix.T @ r.weights).max() < 1e-8
                                                      for r in res)
    record("A8 H2-constrained bound", ok,
           f"ratio max/min {spread:.2f}, c1/||f|| slope {slope:.4f}, nullity {res[0].nullity}")
    assert ok


def test_a9_positivity(record):
    vals = X.positivity_check(G.fig2_family(), seeds=(0, 1, 2))
    ok = all(v > 0 for v in vals)
    record("A9 positivity", ok, "c1 = " + ", ".join(f"{v:.4f}" for v in vals))
    assert ok


def test_a10_profile(record):
    fam = G.fig2_family()
    profs = [S.canonical_profile(fam, j, R_art=64.0) for j in range(1, 6)]
    kmin = profs[0].field.values.min()
    ratios = [S.h1_bound_ratio(p, 8.0) for p in profs]
    spread = max(ratios) / min(ratios)
    alt = S.canonical_profile(fam, 1, R_art=64.0, cutoff=(1.2, 2.5))
    dev = S.profile_deviation(profs[0], alt)
    cont = S.canonical_profile(fam, 1, R_art=64.0, lifting="continuous")
    cont_alt = S.canonical_profile(fam, 1, R_art=64.0, cutoff=(1.2, 2.5), lifting="continuous")
    # mesh error estimate: gap between two consistent discretisations of the same profile
    estimate = profs[0].truncation_error + S.profile_deviation(profs[0], cont)
    dev_cont = S.profile_deviation(cont, cont_alt)
    ok = kmin >= -1e-8 and spread <= 10 and dev <= estimate and dev_cont <= estimate
    record("A10 canonical profile", ok,
           f"min K1 {kmin:.1e}, ratio spread {spread:.2f}, cutoff change {dev:.1e} / {dev_cont:.1e} "
           f"vs estimate {estimate:.1e}")
    assert ok
