"""Lagrange P1/P2 finite elements for the Dirichlet Poisson problem.

The continuous problem is ``Delta u = f`` with ``u = 0`` on the boundary.
Its weak form ``-int grad u . grad v = int f v`` is assembled as the SPD
system ``A u = b`` with ``b = -int f v``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import cutoffs
from .errors import SolveFailure, SupportViolation
from .geometry import SectorSpec
from .meshing import Mesh, region_mask
from .quadrature import triangle_rule

RESIDUAL_TOL = 1e-10


# ---------------------------------------------------------------- basis
def shape(order, bary):
    """Shape values ``(nq, nloc)``; P2 order is v0, v1, v2, m01, m12, m20."""
    l0, l1, l2 = np.asarray(bary, dtype=float).T
    if order == 1:
        return np.column_stack([l0, l1, l2])
    return np.column_stack([l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                            4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0])


def shape_dbary(order, bary):
    """Derivatives with respect to the barycentric coordinates, ``(nq, nloc, 3)``."""
    bary = np.asarray(bary, dtype=float)
    nq = len(bary)
    if order == 1:
        return np.broadcast_to(np.eye(3), (nq, 3, 3)).copy()
    l0, l1, l2 = bary.T
    d = np.zeros((nq, 6, 3))
    d[:, 0, 0] = 4 * l0 - 1
    d[:, 1, 1] = 4 * l1 - 1
    d[:, 2, 2] = 4 * l2 - 1
    d[:, 3, 0], d[:, 3, 1] = 4 * l1, 4 * l0
    d[:, 4, 1], d[:, 4, 2] = 4 * l2, 4 * l1
    d[:, 5, 2], d[:, 5, 0] = 4 * l0, 4 * l2
    return d


def grad_lambda(mesh: Mesh):
    """Constant gradients of the barycentric coordinates, ``(T, 3, 2)``."""
    c = mesh.coords
    a2 = 2.0 * mesh.areas
    g = np.empty((mesh.n_triangles, 3, 2))
    for i in range(3):
        e = c[:, (i + 2) % 3] - c[:, (i + 1) % 3]
        g[:, i, 0] = -e[:, 1] / a2
        g[:, i, 1] = e[:, 0] / a2
    return g


class Space:
    """Degree-of-freedom layout of the P1 or P2 space on a mesh."""

    def __init__(self, mesh: Mesh, order: int):
        if order not in (1, 2):
            raise ValueError("element order must be 1 or 2")
        self.mesh = mesh
        self.order = order
        nv = mesh.n_vertices
        if order == 1:
            self.cell_dofs = mesh.triangles.copy()
            self.dof_coords = mesh.vertices.copy()
            bd = mesh.boundary_vertices
        else:
            edges, local, counts = mesh.edge_data
            self.cell_dofs = np.hstack([mesh.triangles, nv + local])
            mid = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
            self.dof_coords = np.vstack([mesh.vertices, mid])
            bd = np.concatenate([mesh.boundary_vertices, nv + np.flatnonzero(counts == 1)])
        self.n_dofs = len(self.dof_coords)
        self.dirichlet = np.zeros(self.n_dofs, dtype=bool)
        self.dirichlet[bd] = True

    @property
    def nloc(self):
        return 3 if self.order == 1 else 6

    @cached_property
    def element_stiffness(self):
        """Exact element stiffness matrices ``(T, nloc, nloc)``."""
        bary, w = triangle_rule(2 * (self.order - 1))
        g = self.physical_gradients(bary)
        return np.einsum("q,t,tqad,tqbd->tab", w, self.mesh.areas, g, g)

    def physical_gradients(self, bary, tri=None):
        """Basis gradients ``(T, nq, nloc, 2)`` at barycentric points."""
        gl = grad_lambda(self.mesh)
        if tri is not None:
            gl = gl[tri]
        return np.einsum("qak,tkd->tqad", shape_dbary(self.order, bary), gl)

    @cached_property
    def stiffness(self):
        ke = self.element_stiffness
        rows = np.repeat(self.cell_dofs, self.nloc, axis=1).ravel()
        cols = np.tile(self.cell_dofs, (1, self.nloc)).ravel()
        a = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(self.n_dofs, self.n_dofs))
        return a.tocsr()

    def quad_points(self, degree=4):
        bary, w = triangle_rule(degree)
        pts = np.einsum("qk,tkd->tqd", bary, self.mesh.coords)
        return bary, w, pts

    def load(self, f, degree=4):
        """``b_a = -int f phi_a``."""
        bary, w, pts = self.quad_points(degree)
        fv = np.asarray(f(pts.reshape(-1, 2)), dtype=float).reshape(pts.shape[:2])
        be = -np.einsum("q,t,tq,qa->ta", w, self.mesh.areas, fv, shape(self.order, bary))
        b = np.zeros(self.n_dofs)
        np.add.at(b, self.cell_dofs.ravel(), be.ravel())
        return b


def space(mesh: Mesh, order: int) -> Space:
    """Cached :class:`Space` attached to the mesh."""
    cache = mesh.__dict__.setdefault("_spaces", {})
    if order not in cache:
        cache[order] = Space(mesh, order)
    return cache[order]


# ---------------------------------------------------------------- fields
@dataclass
class FemField:
    mesh: Mesh
    order: int
    values: np.ndarray
    dirichlet: np.ndarray

    @property
    def space(self) -> Space:
        return space(self.mesh, self.order)

    @property
    def local(self):
        """Element-local dof values ``(T, nloc)``."""
        return self.values[self.space.cell_dofs]

    def __call__(self, points):
        return evaluate(self, points)

    def __add__(self, other):
        return FemField(self.mesh, self.order, self.values + other.values, self.dirichlet)

    def __sub__(self, other):
        return FemField(self.mesh, self.order, self.values - other.values, self.dirichlet)

    def __mul__(self, c):
        return FemField(self.mesh, self.order, self.values * c, self.dirichlet)

    __rmul__ = __mul__

    def gradients_at(self, bary):
        """Gradient on every element at barycentric points, ``(T, nq, 2)``."""
        g = self.space.physical_gradients(bary)
        return np.einsum("tqad,ta->tqd", g, self.local)

    def values_at(self, bary):
        return self.local @ shape(self.order, bary).T

    def restrict(self, sub: Mesh) -> "FemField":
        """Field on a submesh (``sub.parent`` indexes triangles of this mesh)."""
        vals = np.zeros(space(sub, self.order).n_dofs)
        vals[space(sub, self.order).cell_dofs] = self.local[sub.parent]
        return FemField(sub, self.order, vals, space(sub, self.order).dirichlet)


def evaluate(field: FemField, points):
    p = np.atleast_2d(np.asarray(points, dtype=float))
    tri, bary = field.mesh.locate_strict(p)
    sh = shape(field.order, bary)
    out = np.sum(field.local[tri] * sh, axis=1)
    return out if np.ndim(points) > 1 else out[0]


def eval_gradient(field: FemField, points):
    p = np.atleast_2d(np.asarray(points, dtype=float))
    tri, bary = field.mesh.locate_strict(p)
    d = shape_dbary(field.order, bary)
    gl = grad_lambda(field.mesh)[tri]
    g = np.einsum("nak,nkd,na->nd", d, gl, field.local[tri])
    return g if np.ndim(points) > 1 else g[0]


def interpolate(mesh: Mesh, func, order=2) -> FemField:
    """Nodal Lagrange interpolant of ``func``."""
    s = space(mesh, order)
    vals = np.asarray(func(s.dof_coords), dtype=float)
    return FemField(mesh, order, vals, s.dirichlet)


def energy(field: FemField, region=None):
    """``int_region |grad u|^2`` with exact element quadrature."""
    from .errors import EmptyRegion

    mask = region_mask(field.mesh, region)
    if not np.any(mask):
        raise EmptyRegion("energy region contains no triangle")
    loc = field.local[mask]
    ke = field.space.element_stiffness[mask]
    return float(np.einsum("ta,tab,tb->", loc, ke, loc))


def export_field(field: FemField, path):
    with open(path, "w") as fh:
        fh.write(f"#order {field.order}\n#dofs {len(field.values)}\n")
        for v in field.values:
            fh.write(f"{v:.17g}\n")


# ---------------------------------------------------------------- data
@dataclass(frozen=True)
class AnalyticDeltaPhiH1:
    """``f = Delta(phi h_j)`` for the corner cutoff ``phi`` of the sector."""

    sector: SectorSpec
    j: int = 1

    @property
    def lam(self):
        return self.j * math.pi / self.sector.omega

    def __call__(self, points):
        r, th = self.sector.polar(points)
        ph, d1, d2 = cutoffs.phi(r, self.sector.r0)
        lam = self.lam
        psi = math.sqrt(2.0 / self.sector.omega) * np.sin(lam * th)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = psi * r ** lam * (d2 + (1.0 + 2.0 * lam) * d1 / r)
        return np.where(r > 0, val, 0.0)

    def solution(self, points):
        """The exact solution ``phi h_j``."""
        r, th = self.sector.polar(points)
        ph = cutoffs.phi(r, self.sector.r0)[0]
        psi = math.sqrt(2.0 / self.sector.omega) * np.sin(self.lam * np.clip(th, 0, self.sector.omega))
        return ph * r ** self.lam * psi

    def support_radius(self):
        return 0.5 * self.sector.r0


@dataclass(frozen=True)
class AnnulusBump:
    """Radial bump ``sign * amplitude * (1 - t^2)^3`` on ``|r - center| < width``.

    ``mode = k > 0`` multiplies by ``sin(k pi theta / omega)``.
    """

    sector: SectorSpec
    center: float
    width: float
    amplitude: float = 1.0
    sign: int = 1
    mode: int = 0

    def __call__(self, points):
        r, th = self.sector.polar(points)
        t = (r - self.center) / self.width
        val = np.where(np.abs(t) < 1, (1.0 - t * t) ** 3, 0.0)
        if self.mode:
            val = val * np.sin(self.mode * math.pi * np.clip(th, 0, self.sector.omega)
                               / self.sector.omega)
        return self.sign * self.amplitude * val

    def support_radius(self):
        return self.center - self.width


@dataclass(frozen=True)
class Combination:
    terms: tuple  # ((weight, spec), ...)

    def __call__(self, points):
        out = 0.0
        for w, s in self.terms:
            out = out + w * s(points)
        return out

    def support_radius(self):
        return min(s.support_radius() for _, s in self.terms)


def check_support(rhs, r0):
    """Raise unless ``rhs`` vanishes on ``B(r0/2)``."""
    if rhs.support_radius() < 0.5 * r0 * (1 - 1e-12):
        raise SupportViolation(f"rhs support reaches radius {rhs.support_radius():g} < r0/2")


def solve_dirichlet(mesh: Mesh, rhs, order=2, *, r0=None, method="direct",
                    quad_degree=4) -> FemField:
    """Galerkin solution of ``Delta u = f``, ``u = 0`` on the boundary.

    ``rhs`` is any callable on ``(n, 2)`` points.  When ``r0`` is given the
    data must vanish on ``B(r0/2)``.
    """
    if r0 is not None:
        check_support(rhs, r0)
    s = space(mesh, order)
    b = s.load(rhs, quad_degree)
    free = ~s.dirichlet
    u = np.zeros(s.n_dofs)
    bf = b[free]
    nb = np.linalg.norm(bf)
    if nb == 0:
        return FemField(mesh, order, u, s.dirichlet)
    a = s.stiffness[free][:, free].tocsc()
    if method == "direct":
        x = spla.spsolve(a, bf)
    elif method == "cg":
        d = a.diagonal()
        m = spla.LinearOperator(a.shape, matvec=lambda v: v / d)
        x, info = spla.cg(a, bf, rtol=1e-13, atol=0.0, maxiter=20 * a.shape[0], M=m)
        if info != 0:
            raise SolveFailure(f"conjugate gradients did not converge (info={info})")
    else:
        raise ValueError(f"unknown method {method!r}")
    res = np.linalg.norm(a @ x - bf) / nb
    if not np.isfinite(res) or res > RESIDUAL_TOL:
        raise SolveFailure(f"relative residual {res:.2e} exceeds {RESIDUAL_TOL:g}")
    u[free] = x
    return FemField(mesh, order, u, s.dirichlet)


def galerkin_residual(field: FemField, rhs, quad_degree=4):
    """Relative size of ``A u - b`` on the free dofs."""
    s = field.space
    b = s.load(rhs, quad_degree)
    free = ~s.dirichlet
    r = (s.stiffness @ field.values - b)[free]
    return float(np.linalg.norm(r) / max(np.linalg.norm(b[free]), 1e-300))


def l2_error(field: FemField, exact, degree=6):
    """``||u_h - u||_{L2}`` by element quadrature."""
    bary, w, pts = field.space.quad_points(degree)
    uh = field.values_at(bary)
    ue = np.asarray(exact(pts.reshape(-1, 2))).reshape(uh.shape)
    return float(math.sqrt(np.einsum("q,t,tq->", w, field.mesh.areas, (uh - ue) ** 2)))


def h1_error(field: FemField, exact_grad, degree=6):
    """``|u_h - u|_{H1}`` by element quadrature."""
    bary, w, pts = field.space.quad_points(degree)
    gh = field.gradients_at(bary)
    ge = np.asarray(exact_grad(pts.reshape(-1, 2))).reshape(gh.shape)
    return float(math.sqrt(np.einsum("q,t,tqd->", w, field.mesh.areas, (gh - ge) ** 2)))
