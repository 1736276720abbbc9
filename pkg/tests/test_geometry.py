import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerlab import geometry as G
from cornerlab.errors import AngleSumViolation, EpsilonOutOfRange, GeometryMismatch


def _family(openings):
    sector = G.SectorSpec(1.5 * math.pi)
    corners = G.chain_corners(sector, openings)
    return G.build_family(G.lshape(), sector, G.PatternSpec("polygonal", 1.0, corners, openings))


def test_fig2_family_accepted(fig2):
    assert np.allclose(fig2.pattern.openings, [1.25 * math.pi] * 2)
    assert np.allclose(fig2.pattern.corners, [(0.0, -0.5), (0.5, 0.0)])
    assert fig2.eps0 == 1.0
    assert fig2.is_mirror_symmetric


def test_pattern_equal_to_sector_rejected():
    with pytest.raises(GeometryMismatch):
        _family([1.5 * math.pi])


def test_three_corner_chain_accepted():
    fam = _family([7 * math.pi / 6] * 3)
    assert len(fam.pattern.corners) == 3
    assert np.allclose(fam.pattern.openings, 7 * math.pi / 6)


def test_angle_sum_violation():
    sector = G.SectorSpec(1.5 * math.pi)
    corners = G.chain_corners(sector, [1.25 * math.pi] * 2)
    bad = G.PatternSpec("polygonal", 1.0, corners, (1.25 * math.pi, 1.3 * math.pi))
    with pytest.raises(AngleSumViolation):
        G.build_family(G.lshape(), sector, bad)


def test_eps_zero_is_base(fig2):
    dom = G.instantiate(fig2, 0.0)
    assert np.array_equal(dom.vertices, fig2.base)


def test_small_corners_at_scaled_points(fig2):
    dom = G.instantiate(fig2, 0.25)
    assert np.allclose(dom.small_corners, [(0.0, -0.125), (0.125, 0.0)])
    area = G.polygon_area(dom.vertices)
    # the chord between the two corners fills a triangle of the notch
    assert area == pytest.approx(3.0 + 0.5 * 0.125 ** 2)


def test_eps_range(fig2):
    with pytest.raises(EpsilonOutOfRange):
        G.instantiate(fig2, fig2.eps0)
    with pytest.raises(EpsilonOutOfRange):
        G.corner_layer(fig2, 0.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 0.2))
def test_layer_is_similarity_image(fig2, eps):
    a = G.corner_layer(fig2, eps)
    b = G.corner_layer(fig2, eps / 2)
    assert np.allclose(b.polygon, 0.5 * a.polygon)
    assert b.exact_area == pytest.approx(a.exact_area / 4, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 6.2), st.floats(-math.pi, math.pi), st.floats(0.01, 3.0))
def test_polar_cartesian_roundtrip(omega, rot, r):
    s = G.SectorSpec(omega, (math.cos(rot), math.sin(rot)))
    th = np.linspace(0, omega, 7)
    r_, th_ = s.polar(s.cartesian(np.full(7, r), th))
    assert np.allclose(r_, r) and np.allclose(th_, th, atol=1e-9)


def test_mirror_swaps_edges(lsector):
    p = lsector.cartesian(np.array([1.0]), np.array([0.0]))
    q = lsector.mirror(p)
    assert np.allclose(lsector.polar(q)[1], lsector.omega)


def test_dict_roundtrip(fig2):
    fam = G.family_from_dict(G.family_to_dict(fig2))
    assert np.allclose(fam.base, fig2.base)
    assert np.allclose(fam.pattern.corners, fig2.pattern.corners)


def test_bad_sector():
    with pytest.raises(GeometryMismatch):
        G.SectorSpec(2 * math.pi)
