import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerlab import spectral as S
from cornerlab.errors import NonPositiveMu
from cornerlab.geometry import SectorSpec


def test_lshape_exponents():
    lam = [e.lam_plus for e in S.exponents_sector(1.5 * math.pi, 3)]
    assert np.allclose(lam, [2 / 3, 4 / 3, 2])


def test_half_plane_polynomial():
    ex = S.exponents_sector(math.pi, 2)
    assert np.allclose([e.lam_plus for e in ex], [1, 2])
    assert all(e.polynomial for e in ex)


def test_pattern_corner_exponent():
    assert S.exponents_sector(1.25 * math.pi, 1)[0].lam_plus == pytest.approx(0.8)


@pytest.mark.parametrize("n,mu,expect", [(2, 4 / 9, (2 / 3, -2 / 3)), (3, 2, (1, -2)), (2, 1, (1, -1))])
def test_lambda_from_mu(n, mu, expect):
    assert np.allclose(S.lambda_from_mu(n, mu), expect)


def test_nonpositive_mu():
    with pytest.raises(NonPositiveMu):
        S.lambda_from_mu(2, 0.0)


def test_singular_function_values(lsector):
    h = S.SingularFunction(S.exponents_sector(lsector.omega, 1)[0], lsector)
    edge = lsector.cartesian(np.array([0.3, 1.0]), np.array([0.0, 0.0]))
    assert np.allclose(h(edge), 0)
    mid = lsector.cartesian(np.array([1.0]), np.array([0.75 * math.pi]))
    assert h(mid)[0] == pytest.approx(math.sqrt(4 / (3 * math.pi)))


def test_harmonic_by_stencil(lsector):
    h = S.SingularFunction(S.exponents_sector(lsector.omega, 1)[0], lsector)
    p = lsector.cartesian(np.array([0.6]), np.array([1.0]))
    lap = []
    for d in (1e-2, 5e-3):
        e = np.array([[d, 0], [-d, 0], [0, d], [0, -d]])
        lap.append(abs(h(p + e).sum() - 4 * h(p)[0]) / d ** 2)
    assert lap[1] < 1e-3 and lap[1] < lap[0] / 3


def test_membership():
    e = S.exponents_sector(1.5 * math.pi, 3)
    assert not S.wmp_membership(e[0], 2, 2)
    assert S.wmp_membership(e[2], 2, 2)
    assert S.wmp_membership(S.exponents_sector(math.pi, 1)[0], 5, 7)


def test_lambda_prime():
    assert S.lambda_prime(1.5 * math.pi) == pytest.approx(2 / 3)
    assert S.lambda_prime(math.pi) == pytest.approx(1.0)
    assert S.lambda_prime(2 * math.pi - 1e-6) == pytest.approx(0.5, abs=1e-6)


def test_monoid():
    gens = S.sector_generators(1.5 * math.pi, 2.0)
    assert np.allclose(S.exponent_monoid(gens, 2.0), [0, 2 / 3, 4 / 3, 2])
    assert np.allclose(S.exponent_monoid([1.0], 3.0), [0, 1, 2, 3])


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 6.2), st.integers(1, 4))
def test_angular_orthonormal(omega, j):
    th = np.linspace(0, omega, 4001)
    f = S.angular(omega, j, th)
    assert np.trapezoid(f * f, th) == pytest.approx(1.0, rel=1e-5)
