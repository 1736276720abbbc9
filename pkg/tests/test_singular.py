import math

import numpy as np
import pytest

from cornerlab import fem, geometry as G, meshing as M, singular as S
from cornerlab.errors import RadiusOutOfRange, RhoOutOfRange, TruncationTooSmall

SMALL = M.MeshBudget(n_theta=24, pattern_layers=4)


def test_orthonormal_extraction(lsector):
    u = S.SingularSum(lsector, {1: 1.0})
    e1 = S.extract_coefficient(u, lsector, 1)
    assert abs(e1.value - 1) < 1e-10 and e1.spread < 1e-10
    assert abs(S.extract_coefficient(u, lsector, 2).value) < 1e-10


def test_linearity(lsector):
    a = S.SingularSum(lsector, {1: 3.0, 2: 2.0})
    b = S.SingularSum(lsector, {1: -1.0, 3: 0.5})
    ab = S.SingularSum(lsector, {1: 2.0, 2: 2.0, 3: 0.5})
    for j in (1, 2, 3):
        lhs = S.extract_coefficient(ab, lsector, j).value
        rhs = S.extract_coefficient(a, lsector, j).value + S.extract_coefficient(b, lsector, j).value
        assert abs(lhs - rhs) < 1e-12


def test_parseval_missing_term(lsector):
    u = S.SingularSum(lsector, {1: 1.0, 2: 1.0})
    rho = 0.4
    l1, l2 = 2 / 3, 4 / 3
    expect = l2 * rho ** (2 * l2) / (l1 * rho ** (2 * l1) + l2 * rho ** (2 * l2))
    assert S.parseval_residual(u, lsector, 1, rho) == pytest.approx(expect, rel=1e-8)
    assert S.parseval_residual(u, lsector, 2, rho) < 1e-8
    assert S.parseval_residual(S.SingularSum(lsector, {}), lsector, 2, rho) == 0


def test_rho_range(lsector):
    with pytest.raises(RhoOutOfRange):
        S.extract_coefficient(S.SingularSum(lsector, {1: 1.0}), lsector, 1, np.array([0.8]))


@pytest.fixture(scope="module")
def profile(fig2):
    return S.canonical_profile(fig2, 1, R_art=64.0, budget=SMALL)


def test_profile_trace_and_positivity(profile):
    k = profile.field
    s = fem.space(k.mesh, k.order)
    r = np.hypot(*s.dof_coords.T)
    inner = s.dirichlet & (r < 10)
    assert np.abs(k.values[inner]).max() <= 1e-10
    assert k.values.min() >= -1e-8


def test_profile_behaves_like_h1_at_infinity(fig2, profile):
    frame = G.SectorSpec(fig2.sector.omega, fig2.sector.bisector, 64.0, fig2.sector.vertex)
    dev = [abs(S.extract_coefficient(profile.field, frame, 1, np.array([r])).value - 1) for r in (4, 8, 16)]
    assert dev[2] < dev[1] < dev[0] < 0.02


def test_h1_ratio_stable_under_doubling(profile):
    a = S.h1_bound_ratio(profile, 8.0)
    b = S.h1_bound_ratio(profile, 16.0)
    assert 0.5 < a / b < 2
    assert a == pytest.approx(S.cone_h1_ratio(2 / 3), rel=0.1)
    with pytest.raises(RadiusOutOfRange):
        S.h1_bound_ratio(profile, 1.0)


def test_truncation_guard(fig2):
    with pytest.raises(TruncationTooSmall):
        S.canonical_profile(fig2, 1, R_art=3.0, budget=SMALL)


def test_split_recovers_synthetic_coefficient(fig2):
    eps = 1.0 / 8
    frames = S._corner_frames(fig2, eps)
    h = frames[0].r0 / 2
    # cutoff outside the extraction window, support away from the other corner
    g = S.SmallCornerSingular(frames[0], 0.7, 0.45 * h, 0.55 * h)
    mesh = M.family_mesh(fig2, eps, SMALL)
    u = fem.interpolate(mesh, g, 2)
    split = S.split_at_small_corners(u, fig2, eps, rho_grid=np.geomspace(0.1, 0.35, 8))
    assert split.d[0] == pytest.approx(0.7, rel=5e-3)
    assert abs(split.d[1]) < 1e-3


def test_split_symmetric_for_symmetric_data(fig2):
    eps = 1.0 / 8
    u = fem.solve_dirichlet(M.family_mesh(fig2, eps, SMALL), fem.AnalyticDeltaPhiH1(fig2.sector), 2)
    d = S.split_at_small_corners(u, fig2, eps).d
    assert abs(d[0]) > 0.1
    assert abs(abs(d[0]) - abs(d[1])) < 1e-2 * abs(d[0])
