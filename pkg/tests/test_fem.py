import math

import numpy as np
import pytest

from cornerlab import fem, geometry as G, meshing as M
from cornerlab.errors import SupportViolation
from cornerlab.verify import SinSin, manufactured_rates


def test_zero_rhs_gives_zero():
    u = fem.solve_dirichlet(M.rectangle_mesh(6), lambda p: np.zeros(len(p)), 2)
    assert np.abs(u.values).max() == 0


def test_manufactured_p1_rates():
    s1, s0 = manufactured_rates((4, 8, 16, 32))
    assert abs(s1 - 1) < 0.15 and abs(s0 - 2) < 0.2


def test_manufactured_p2_rates():
    s1, s0 = manufactured_rates((4, 8, 16), order=2)
    assert s1 > 1.8 and s0 > 2.7


def test_lshape_reference_solution(lsector):
    rhs = fem.AnalyticDeltaPhiH1(lsector)
    errs = []
    for h in (0.2, 0.1):
        mesh = M.triangulate(G.lshape(), h, M.Grading(0.5, 6))
        u = fem.solve_dirichlet(mesh, rhs, 2, r0=lsector.r0)
        exact = rhs.solution(u.space.dof_coords)
        errs.append(np.abs(u.values - exact).max())
    assert errs[1] < errs[0] and errs[1] < 1e-3


def test_vertex_evaluation():
    mesh = M.rectangle_mesh(4)
    f = fem.interpolate(mesh, lambda p: p[:, 0] ** 2 + p[:, 1], 2)
    v = mesh.vertices[[3, 7]]
    assert np.allclose(fem.evaluate(f, v), v[:, 0] ** 2 + v[:, 1])


def test_energy_constant_and_singular(lsector):
    mesh = M.rectangle_mesh(4)
    assert fem.energy(fem.interpolate(mesh, lambda p: np.full(len(p), 2.0), 1)) == pytest.approx(0, abs=1e-24)
    from cornerlab.spectral import SingularFunction, exponents_sector
    h = SingularFunction(exponents_sector(lsector.omega, 1)[0], lsector)
    lam, rho = 2 / 3, 0.5
    vals = []
    for n in (24, 48):
        mesh = M.family_mesh(G.fig2_family(), 0.0, M.MeshBudget(n_theta=n))
        vals.append(fem.energy(fem.interpolate(mesh, h, 2), ("disk", lsector.vertex, rho)))
    exact = lam * rho ** (2 * lam)
    assert abs(vals[1] - exact) < abs(vals[0] - exact) + 1e-12
    assert vals[1] == pytest.approx(exact, rel=5e-3)


def test_support_violation(lsector):
    with pytest.raises(SupportViolation):
        fem.check_support(fem.AnnulusBump(lsector, 0.5, 0.2), lsector.r0)


def test_field_arithmetic():
    mesh = M.rectangle_mesh(3)
    a = fem.interpolate(mesh, SinSin(), 2)
    b = 2.0 * a - a
    assert np.allclose(b.values, a.values)
