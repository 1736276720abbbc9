import math

import numpy as np
import pytest

from cornerlab import fem, meshing as M, norms as N
from cornerlab.errors import DivergentRequest, NonzeroTrace
from cornerlab.verify import BubbleQuartic, SinSin, scaling_deviation

# closed form of the x1 seminorm on the unit square for theta = 1/2, p = 2, by polar dblquad
X1_ORACLE = 1.4866047991236893


class Linear:
    def __call__(self, p):
        return p[:, 0] + p[:, 1]

    def grad(self, p):
        return np.ones((len(p), 2))


@pytest.fixture(scope="module")
def square():
    return M.rectangle_mesh(8)


def test_integer_examples(square):
    assert N.integer_seminorm(Linear(), 1, 2, square) == pytest.approx(math.sqrt(2), rel=1e-12)
    expect = math.pi ** 2 * math.sqrt(0.75)
    assert N.integer_seminorm(SinSin(), 2, 2, M.rectangle_mesh(16)) == pytest.approx(expect, rel=1e-8)
    one = fem.interpolate(square, lambda p: np.ones(len(p)), 1)
    assert N.integer_seminorm(one, 0, 3.0) == pytest.approx(1.0, rel=1e-12)


def test_constant_has_zero_seminorm(square):
    c = N.P1Data(square, np.full(square.n_vertices, 3.0))
    assert N.slobodeckii_seminorm(c, 0.5) < 1e-12


@pytest.mark.parametrize("s,p", [(0.5, 2.0), (1.4, 2.0), (0.5, 3.0), (1.0, 2.0), (1.0, 3.0)])
def test_exact_scaling(s, p):
    assert scaling_deviation(s, p) <= 1e-10


def test_pair_symmetry():
    mesh = M.rectangle_mesh(4)
    d = N.P1Data(mesh, np.sin(3 * mesh.vertices[:, 0]) + mesh.vertices[:, 1] ** 2)
    a = N.slobodeckii_seminorm(d, 0.6, symmetric=True)
    b = N.slobodeckii_seminorm(d, 0.6, symmetric=False)
    assert a == pytest.approx(b, rel=1e-12)


def test_refinement_control():
    mesh = M.rectangle_mesh(4)
    d = N.P1Data(mesh, mesh.vertices[:, 0])
    a = N.slobodeckii_seminorm(d, 0.5, levels=4)
    b = N.slobodeckii_seminorm(d, 0.5, levels=5)
    assert abs(a - b) <= 5e-3 * b


def test_linear_oracle():
    mesh = M.rectangle_mesh(8)
    val = N.slobodeckii_seminorm(N.P1Data(mesh, mesh.vertices[:, 0]), 0.5) ** 2
    assert val == pytest.approx(X1_ORACLE, rel=0.02)


def test_integer_s_is_integer_norm(square):
    u = fem.interpolate(square, SinSin(), 2)
    assert N.fractional_norm(u, 1.0) == N.integer_seminorm(u, 1)


def test_region_monotone(square):
    u = fem.interpolate(square, SinSin(), 1)
    sub = ("disk", (0.5, 0.5), 0.3)
    assert N.fractional_norm(u, 0.5, 2, sub) <= N.fractional_norm(u, 0.5, 2)


def test_divergent_requests(square):
    with pytest.raises(DivergentRequest):
        N.fractional_norm(fem.interpolate(square, SinSin(), 1), 1.5)
    with pytest.raises(DivergentRequest):
        N.fractional_norm(fem.interpolate(square, SinSin(), 2), 2.5)


def test_h2_identity(square):
    assert N.h2_identity_residual(SinSin(), square) <= 1e-10
    assert N.h2_identity_residual(BubbleQuartic(), square) <= 1e-10
    with pytest.raises(NonzeroTrace):
        N.h2_identity_residual(Linear(), square)


def test_h2_identity_discrete():
    mesh = M.rectangle_mesh(32)
    assert N.h2_identity_residual(fem.interpolate(mesh, SinSin(), 2), mesh) <= 0.02


def test_literal_identity_is_off():
    # with a single mixed term the two sides differ by pi^4/4 for sin sin
    mesh = M.rectangle_mesh(16)
    h = SinSin()
    lap2 = N.integer_seminorm(type("L", (), {"__call__": lambda s_, p: h.laplacian(p)})(), 0, 2, mesh) ** 2
    single = N.integer_seminorm(h, 2, 2, mesh) ** 2
    assert lap2 == pytest.approx(math.pi ** 4, rel=1e-8)
    assert single == pytest.approx(0.75 * math.pi ** 4, rel=1e-8)
