import math

import numpy as np
import pytest

from cornerlab import geometry as G
from cornerlab import meshing as M
from cornerlab.errors import EmptyRegion, PointOutside

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)


def test_square_triangle_count():
    n = 8
    mesh = M.triangulate(SQUARE, 1.0 / n)
    assert 1.5 * 2 * n * n <= mesh.n_triangles <= 3 * 2 * n * n
    assert mesh.areas.sum() == pytest.approx(1.0)
    M.check_mesh(mesh, SQUARE)


def test_lshape_grading_reaches_corner():
    h = 0.25
    mesh = M.triangulate(G.lshape(), h, M.Grading(0.5, 8))
    d = np.hypot(*mesh.vertices.T)
    near = d[d > 0].min()
    assert near <= h * 2 ** -8 * (1 + 1e-9)
    assert mesh.min_angle() >= 15


def test_zero_layers_is_ungraded():
    a = M.triangulate(G.lshape(), 0.25, M.Grading(0.5, 0))
    b = M.triangulate(G.lshape(), 0.25)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)


def test_scale_identity():
    mesh = M.rectangle_mesh(4)
    assert np.array_equal(M.scale(mesh, 1.0).vertices, mesh.vertices)
    assert M.scale(mesh, 0.5).areas.sum() == pytest.approx(0.25)


def test_submesh_whole_and_disk(fig2):
    mesh = M.family_mesh(fig2, 0.0, M.MeshBudget(n_theta=24))
    whole = M.submesh(mesh, lambda c: np.ones(len(c), bool))
    assert np.array_equal(whole.triangles.shape, mesh.triangles.shape)
    rho = 0.5 * fig2.sector.r0
    exact = 0.5 * fig2.sector.omega * rho ** 2
    err = []
    for n in (24, 48, 96):
        m = M.family_mesh(fig2, 0.0, M.MeshBudget(n_theta=n))
        err.append(abs(M.submesh(m, ("disk", fig2.sector.vertex, rho)).areas.sum() - exact))
    assert err[2] < err[1] < err[0] and err[2] < 2e-3 * exact
    with pytest.raises(EmptyRegion):
        M.submesh(mesh, ("disk", (5.0, 5.0), 0.1))


def test_family_mesh_layers(fig2):
    budget = M.MeshBudget(n_theta=24, pattern_layers=4)
    eps = 1.0 / 16
    mesh = M.family_mesh(fig2, eps, budget)
    dom = G.instantiate(fig2, eps)
    assert mesh.areas.sum() == pytest.approx(G.polygon_area(dom.vertices), rel=1e-12)
    layer = M.submesh(mesh, "layer")
    assert layer.areas.sum() == pytest.approx(G.corner_layer(fig2, eps).exact_area, rel=1e-2)
    assert mesh.min_angle() >= M.MIN_ANGLE


def test_locate(tmp_path):
    mesh = M.rectangle_mesh(4)
    pts = np.array([[0.1, 0.2], [0.9, 0.9]])
    idx, bary = mesh.locate(pts)
    c = mesh.vertices[mesh.triangles[idx]]
    assert np.allclose(np.einsum("ni,nij->nj", bary, c), pts)
    with pytest.raises(PointOutside):
        mesh.locate_strict(np.array([[2.0, 2.0]]))


def test_export_import(tmp_path):
    mesh = M.rectangle_mesh(3)
    path = tmp_path / "m.txt"
    M.export_mesh(mesh, path)
    back = M.import_mesh(path)
    assert np.allclose(back.vertices, mesh.vertices)
    assert np.array_equal(back.triangles, mesh.triangles)


def test_sector_core_conforming(lsector):
    core = M.sector_core(lsector, 0.5, 48)
    M.check_mesh(core)
    assert core.areas.sum() == pytest.approx(0.5 * 0.25 * lsector.omega, rel=2e-3)
    assert core.min_angle() >= M.MIN_ANGLE
