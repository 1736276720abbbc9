"""Integer and fractional Sobolev seminorms on triangulated regions.

Fractional seminorms are evaluated for continuous piecewise linear data
``g`` on a triangulation by an element-pair double integral

    |g|^p_{theta,p} = int int |g(x) - g(y)|^p / |x - y|^(2 + theta p) dx dy.

Well separated pairs use a tensor Gauss rule.  Near pairs are subdivided
(red refinement) a fixed number of levels.  The self-interaction of a
triangle is obtained exactly from its children: for linear ``g`` the four
children are similar to the parent, so ``I(T) = 4 * 2^-(2 + p - theta p)
I(T) + (sum over distinct child pairs)``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from . import fem
from .errors import DivergentRequest, NonzeroTrace, OrderUnavailable
from .meshing import Mesh, submesh, triangulate
from .quadrature import collapsed_gauss, triangle_rule

LEVELS = 4
CHILD_DEGREE = 2
CHUNK_PAIRS = 100_000


# ---------------------------------------------------------------- P1 data
class P1Data:
    """Continuous piecewise linear scalar on a triangulation."""

    def __init__(self, mesh: Mesh, values):
        self.mesh = mesh
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (mesh.n_vertices,):
            raise ValueError("P1 data needs one value per vertex")

    def scaled(self, c):
        """Same data on the mesh scaled by ``c`` (values unchanged)."""
        from .meshing import scale

        return P1Data(scale(self.mesh, c), self.values.copy())


def _vertex_average(mesh: Mesh, cell_values):
    """Area-weighted average of per-element constants at the vertices."""
    w = np.repeat(mesh.areas, 3)
    num = np.zeros(mesh.n_vertices)
    den = np.zeros(mesh.n_vertices)
    np.add.at(num, mesh.triangles.ravel(), np.repeat(cell_values, 3) * w)
    np.add.at(den, mesh.triangles.ravel(), w)
    return num / den


def _vertex_average_local(mesh: Mesh, local_values):
    """Area-weighted average of element-local vertex values ``(T, 3)``."""
    w = np.repeat(mesh.areas[:, None], 3, axis=1).ravel()
    num = np.zeros(mesh.n_vertices)
    den = np.zeros(mesh.n_vertices)
    np.add.at(num, mesh.triangles.ravel(), local_values.ravel() * w)
    np.add.at(den, mesh.triangles.ravel(), w)
    return num / den


VERTEX_BARY = np.eye(3)


def p1_iso_p2(field: fem.FemField):
    """P1 interpolant of a P2 field on the uniformly refined mesh."""
    s = field.space
    m = field.mesh
    nv = m.n_vertices
    d = s.cell_dofs
    v0, v1, v2, m01, m12, m20 = d.T
    tris = np.vstack([
        np.column_stack([v0, m01, m20]),
        np.column_stack([m01, v1, m12]),
        np.column_stack([m20, m12, v2]),
        np.column_stack([m01, m12, m20]),
    ])
    child = Mesh(s.dof_coords, tris, np.tile(m.tags, 4))
    return P1Data(child, field.values.copy()), nv


def derivative_data(u, k, region=None):
    """P1 data for every derivative of order ``k`` (one per multi-index).

    Discrete fields are differentiated element-wise and averaged to the
    vertices.  Analytic inputs (``grad``/``hessian`` methods) need a mesh
    as region and are sampled at its vertices.
    """
    if isinstance(u, fem.FemField):
        mesh = u.mesh if region is None else submesh(u.mesh, region)
        f = u if region is None else u.restrict(mesh)
        if k == 0:
            if f.order == 1:
                return [P1Data(mesh, f.values[: mesh.n_vertices])]
            return [p1_iso_p2(f)[0]]
        if k > f.order:
            raise OrderUnavailable(f"order-{k} derivatives of a P{f.order} field are zero")
        if k == 1:
            g = f.gradients_at(VERTEX_BARY)  # (T, 3, 2)
            return [P1Data(mesh, _vertex_average_local(mesh, g[..., i])) for i in range(2)]
        h = _broken_hessian(f)
        return [P1Data(mesh, _vertex_average(mesh, h[:, a, b])) for a, b in ((0, 0), (0, 1), (1, 1))]
    if not isinstance(region, Mesh):
        raise OrderUnavailable("analytic input needs a mesh as region")
    p = region.vertices
    if k == 0:
        return [P1Data(region, u(p))]
    if k == 1:
        g = u.grad(p)
        return [P1Data(region, g[:, 0]), P1Data(region, g[:, 1])]
    if k == 2:
        h = u.hessian(p)
        return [P1Data(region, h[:, a, b]) for a, b in ((0, 0), (0, 1), (1, 1))]
    raise OrderUnavailable(f"derivatives of order {k} are not available")


def _broken_hessian(f: fem.FemField):
    """Constant element Hessians of a P2 field, ``(T, 2, 2)``."""
    if f.order != 2:
        raise OrderUnavailable("second derivatives need a P2 field")
    gl = fem.grad_lambda(f.mesh)
    loc = f.local
    # d2 phi / d lambda_a d lambda_b for the P2 basis
    d2 = np.zeros((6, 3, 3))
    for i in range(3):
        d2[i, i, i] = 4.0
    for n, (a, b) in enumerate(((0, 1), (1, 2), (2, 0))):
        d2[3 + n, a, b] = d2[3 + n, b, a] = 4.0
    return np.einsum("kab,tai,tbj,tk->tij", d2, gl, gl, loc)


# ---------------------------------------------------------------- pair quadrature
def _children(c, g):
    """Red refinement of triangles ``c`` (N,3,2) with linear data ``g`` (N,3)."""
    m01, m12, m20 = 0.5 * (c[:, 0] + c[:, 1]), 0.5 * (c[:, 1] + c[:, 2]), 0.5 * (c[:, 2] + c[:, 0])
    h01, h12, h20 = 0.5 * (g[:, 0] + g[:, 1]), 0.5 * (g[:, 1] + g[:, 2]), 0.5 * (g[:, 2] + g[:, 0])
    cc = np.stack([
        np.stack([c[:, 0], m01, m20], 1),
        np.stack([m01, c[:, 1], m12], 1),
        np.stack([m20, m12, c[:, 2]], 1),
        np.stack([m01, m12, m20], 1),
    ], 1)
    gg = np.stack([
        np.stack([g[:, 0], h01, h20], 1),
        np.stack([h01, g[:, 1], h12], 1),
        np.stack([h20, h12, g[:, 2]], 1),
        np.stack([h01, h12, h20], 1),
    ], 1)
    return cc, gg  # (N,4,3,2), (N,4,3)


def _area(c):
    d1 = c[..., 1, :] - c[..., 0, :]
    d2 = c[..., 2, :] - c[..., 0, :]
    return 0.5 * np.abs(d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0])


def _radius(c):
    cen = c.mean(axis=-2, keepdims=True)
    return np.hypot(*np.moveaxis(c - cen, -1, 0)).max(axis=-1), cen[..., 0, :]


def _kernel(diff, r2, theta, p):
    num = diff * diff if p == 2 else np.abs(diff) ** p
    if p == 2:
        return num / (r2 * r2 ** (0.5 * theta * p))
    return num * r2 ** (-(2.0 + theta * p) / 2.0)


def _gauss_pairs(ca, ga, cb, gb, theta, p, rule):
    bary, w = rule
    xa = bary @ ca
    xb = bary @ cb
    va = ga @ bary.T
    vb = gb @ bary.T
    dx = xa[:, :, None, 0] - xb[:, None, :, 0]
    dy = xa[:, :, None, 1] - xb[:, None, :, 1]
    kern = _kernel(va[:, :, None] - vb[:, None, :], dx * dx + dy * dy, theta, p)
    ww = np.outer(w, w).ravel()
    return _area(ca) * _area(cb) * (kern.reshape(len(ca), -1) @ ww)


def _touching(ca, cb):
    """Pairs sharing at least one vertex."""
    d = ca[:, :, None, :] - cb[:, None, :, :]
    dist = np.hypot(d[..., 0], d[..., 1]).min(axis=(1, 2))
    size = _radius(ca)[0]
    return dist <= 1e-9 * size


def _near_pairs(ca, ga, cb, gb, theta, p, levels, rule, child_rule=None):
    """Double integral over near (possibly touching) distinct pairs.

    Sub-pairs created by refinement use ``child_rule`` (default: ``rule``).
    """
    total = np.zeros(len(ca))
    owner = np.arange(len(ca))
    for lev in range(levels + 1):
        if len(ca) == 0:
            break
        ok = ~_touching(ca, cb) if lev < levels else np.ones(len(ca), dtype=bool)
        if np.any(ok):
            q = rule if lev == 0 or child_rule is None else child_rule
            np.add.at(total, owner[ok], _gauss_pairs(ca[ok], ga[ok], cb[ok], gb[ok], theta, p, q))
        ca, ga, cb, gb, owner = ca[~ok], ga[~ok], cb[~ok], gb[~ok], owner[~ok]
        if lev == levels or len(ca) == 0:
            break
        kA, hA = _children(ca, ga)
        kB, hB = _children(cb, gb)
        n = len(ca)
        ia, ib = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
        ia, ib = ia.ravel(), ib.ravel()
        ca = kA[:, ia].reshape(n * 16, 3, 2)
        ga = hA[:, ia].reshape(n * 16, 3)
        cb = kB[:, ib].reshape(n * 16, 3, 2)
        gb = hB[:, ib].reshape(n * 16, 3)
        owner = np.repeat(owner, 16)
    return total


def _self_pairs(c, g, theta, p, levels, rule):
    """``int_T int_T`` for linear data by the self-similarity renormalization."""
    kc, kg = _children(c, g)
    n = len(c)
    pairs = [(a, b) for a in range(4) for b in range(4) if a < b]
    ia = np.array([a for a, _ in pairs])
    ib = np.array([b for _, b in pairs])
    ca = kc[:, ia].reshape(-1, 3, 2)
    cb = kc[:, ib].reshape(-1, 3, 2)
    ga = kg[:, ia].reshape(-1, 3)
    gb = kg[:, ib].reshape(-1, 3)
    s = _near_pairs(ca, ga, cb, gb, theta, p, levels - 1, rule,
                    triangle_rule(CHILD_DEGREE)).reshape(n, len(pairs)).sum(axis=1)
    factor = 1.0 - 4.0 * 2.0 ** (-(2.0 + p - theta * p))
    return 2.0 * s / factor


def _block(xq, vq, wq, i0, i1, theta, p):
    """Tensor Gauss values of all pairs (rows i0:i1) x (all), shape (i1-i0, T)."""
    dx = xq[i0:i1, None, :, None, 0] - xq[None, :, None, :, 0]
    dy = xq[i0:i1, None, :, None, 1] - xq[None, :, None, :, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        kern = _kernel(vq[i0:i1, None, :, None] - vq[None, :, None, :], dx * dx + dy * dy,
                       theta, p)
    kern = np.nan_to_num(kern, nan=0.0, posinf=0.0)
    t1 = np.einsum("abij,bj->abi", kern, wq, optimize=True)
    return np.einsum("abi,ai->ab", t1, wq[i0:i1], optimize=True)


def _mesh_pair_sum(data: P1Data, theta, p, levels, symmetric, degree=4):
    mesh = data.mesh
    c = mesh.coords
    g = data.values[mesh.triangles]
    T = len(c)
    rule = triangle_rule(degree)
    r, cen = _radius(c)
    tree = cKDTree(cen)
    rmax = float(r.max())
    # near pairs: those sharing a vertex
    cand = tree.query_ball_point(cen, r + rmax * (1 + 1e-9))
    rows = np.repeat(np.arange(T), [len(x) for x in cand])
    cols = np.concatenate([np.asarray(x, dtype=np.int64) for x in cand]) if T else np.zeros(0, int)
    keep = rows < cols
    rows, cols = rows[keep], cols[keep]
    touch = _touching(c[rows], c[cols])
    near_r, near_c = rows[touch], cols[touch]
    # far part: all pairs i<j minus the near set, tensor Gauss
    bary, w = rule
    xq = np.einsum("qk,nkd->nqd", bary, c)
    vq = g @ bary.T
    wq = mesh.areas[:, None] * w[None, :]
    far = 0.0
    block = max(1, CHUNK_PAIRS // max(T, 1))
    for i0 in range(0, T, block):
        i1 = min(T, i0 + block)
        val = _block(xq, vq, wq, i0, i1, theta, p)
        ii = np.arange(i0, i1)[:, None]
        jj = np.arange(T)[None, :]
        mask = jj > ii
        val = np.where(mask, val, 0.0)
        far += float(val.sum())
    # subtract the near pairs that were included above with the crude rule
    if len(near_r):
        crude = 0.0
        for k0 in range(0, len(near_r), CHUNK_PAIRS // 16):
            sl = slice(k0, k0 + CHUNK_PAIRS // 16)
            crude += _gauss_pairs(c[near_r[sl]], g[near_r[sl]], c[near_c[sl]], g[near_c[sl]],
                                  theta, p, rule).sum()
        far -= crude
    near = 0.0
    step = max(1, CHUNK_PAIRS // 256)
    for k0 in range(0, len(near_r), step):
        sl = slice(k0, k0 + step)
        near += _near_pairs(c[near_r[sl]], g[near_r[sl]], c[near_c[sl]], g[near_c[sl]],
                            theta, p, levels, rule, triangle_rule(CHILD_DEGREE)).sum()
    selfv = 0.0
    for k0 in range(0, T, step):
        sl = slice(k0, k0 + step)
        selfv += _self_pairs(c[sl], g[sl], theta, p, levels, rule).sum()
    if symmetric:
        return 2.0 * (far + near) + selfv
    # full ordered evaluation: the (j, i) pairs computed independently
    return _ordered_sum(data, theta, p, levels, rule, near_r, near_c) + selfv


def _ordered_sum(data, theta, p, levels, rule, near_r, near_c):
    mesh = data.mesh
    c = mesh.coords
    g = data.values[mesh.triangles]
    T = len(c)
    bary, w = rule
    xq = np.einsum("qk,nkd->nqd", bary, c)
    vq = g @ bary.T
    wq = mesh.areas[:, None] * w[None, :]
    far = 0.0
    block = max(1, CHUNK_PAIRS // max(T, 1))
    for i0 in range(0, T, block):
        i1 = min(T, i0 + block)
        val = _block(xq, vq, wq, i0, i1, theta, p)
        ii = np.arange(i0, i1)[:, None]
        val = np.where(np.arange(T)[None, :] != ii, val, 0.0)
        far += float(val.sum())
    rr = np.concatenate([near_r, near_c])
    cc = np.concatenate([near_c, near_r])
    if len(rr):
        far -= _gauss_pairs(c[rr], g[rr], c[cc], g[cc], theta, p, rule).sum()
        far += _near_pairs(c[rr], g[rr], c[cc], g[cc], theta, p, levels, rule,
                            triangle_rule(CHILD_DEGREE)).sum()
    return far


def slobodeckii_seminorm(u, theta, p=2.0, region=None, levels=LEVELS, symmetric=True):
    """``(int int |u(x)-u(y)|^p / |x-y|^(2+theta p))^(1/p)`` over a region.

    ``u`` is :class:`P1Data`, a :class:`~cornerlab.fem.FemField` (P2 fields
    use their P1-iso-P2 interpolant) or a callable sampled at the vertices
    of ``region`` (a mesh).
    """
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    if p <= 1:
        raise ValueError("p must exceed 1")
    data = _as_p1(u, region)
    s = _mesh_pair_sum(data, theta, p, levels, symmetric)
    return float(max(s, 0.0) ** (1.0 / p))


def _as_p1(u, region):
    if isinstance(u, P1Data):
        if region is not None:
            sub = submesh(u.mesh, region)
            parent_vertices = np.unique(u.mesh.triangles[sub.parent])
            return P1Data(sub, u.values[parent_vertices])
        return u
    if isinstance(u, fem.FemField):
        return derivative_data(u, 0, region)[0]
    if isinstance(region, Mesh):
        return P1Data(region, np.asarray(u(region.vertices), dtype=float))
    raise ValueError("analytic input needs a mesh as region")


# ---------------------------------------------------------------- integer norms
_MULTI = {0: [()], 1: [(0,), (1,)], 2: [(0, 0), (0, 1), (1, 1)]}


def integer_seminorm(u, m, p=2.0, region=None, degree=None):
    """``(sum_{|alpha|=m} int |d^alpha u|^p)^(1/p)``, each multi-index once.

    Discrete P2 fields give broken (element-wise) second derivatives.
    Analytic inputs need ``region`` to be a mesh.
    """
    if m not in _MULTI:
        raise OrderUnavailable(f"integer order {m} not supported")
    if isinstance(u, fem.FemField):
        if m > u.order:
            raise OrderUnavailable(f"order-{m} derivatives of a P{u.order} field vanish (broken)")
        mesh = u.mesh if region is None else submesh(u.mesh, region)
        f = u if region is None else u.restrict(mesh)
        bary, w = triangle_rule(degree or (2 * f.order if m == 0 else 2))
        if m == 0:
            comps = [f.values_at(bary)]
        elif m == 1:
            g = f.gradients_at(bary)
            comps = [g[..., 0], g[..., 1]]
        else:
            h = _broken_hessian(f)
            comps = [np.repeat(h[:, a, b][:, None], len(w), 1) for a, b in _MULTI[2]]
        area = mesh.areas
    else:
        if not isinstance(region, Mesh):
            raise OrderUnavailable("analytic input needs a mesh as region")
        bary, w = collapsed_gauss(degree or 8)
        pts = np.einsum("qk,tkd->tqd", bary, region.coords).reshape(-1, 2)
        shp = (region.n_triangles, len(w))
        if m == 0:
            comps = [np.asarray(u(pts)).reshape(shp)]
        elif m == 1:
            g = u.grad(pts)
            comps = [g[:, 0].reshape(shp), g[:, 1].reshape(shp)]
        else:
            h = u.hessian(pts)
            comps = [h[:, a, b].reshape(shp) for a, b in _MULTI[2]]
        area = region.areas
    total = sum(np.einsum("q,t,tq->", w, area, np.abs(cmp) ** p) for cmp in comps)
    return float(total ** (1.0 / p))


def fractional_norm(u, s, p=2.0, region=None, mode="seminorm", levels=LEVELS):
    """``W^{s,p}`` seminorm (default) or full norm over a region.

    The seminorm of non-integer ``s = k + theta`` is
    ``(sum_{|alpha|=k} |d^alpha u|^p_{theta,p})^(1/p)``; the full norm adds
    ``||u||^p_{W^{k,p}}``.
    """
    if s < 0:
        raise ValueError("s must be non-negative")
    if mode not in ("seminorm", "full"):
        raise ValueError("mode must be 'seminorm' or 'full'")
    k = int(math.floor(s + 1e-12))
    theta = s - k
    if isinstance(u, fem.FemField):
        limit = 1.5 if u.order == 1 else 2.5
        if s >= limit - 1e-12:
            raise DivergentRequest(f"P{u.order} fields are not in W^(s,p) for s >= {limit}")
    if theta < 1e-12:
        if mode == "seminorm":
            return integer_seminorm(u, k, p, region)
        return float(sum(integer_seminorm(u, i, p, region) ** p for i in range(k + 1)) ** (1 / p))
    total = 0.0
    for d in derivative_data(u, k, region):
        total += slobodeckii_seminorm(d, theta, p, levels=levels) ** p
    if mode == "full":
        total += sum(integer_seminorm(u, i, p, region) ** p for i in range(k + 1))
    return float(total ** (1.0 / p))


# ---------------------------------------------------------------- H2 identity
def h2_identity_residual(u, domain, h=None, tol=1e-10):
    """Relative gap between ``int (Delta u)^2`` and ``int u_xx^2 + 2 u_xy^2 + u_yy^2``.

    ``u`` is analytic (with ``hessian``) or a P2 field; ``domain`` is a mesh
    or a ccw polygon.  Raises :class:`NonzeroTrace` unless ``u = 0`` on the
    boundary.
    """
    if isinstance(u, fem.FemField):
        s = u.space
        scale_ = max(np.abs(u.values).max(), 1e-300)
        if np.abs(u.values[s.dirichlet]).max(initial=0.0) > tol * scale_:
            raise NonzeroTrace("field does not vanish on the boundary")
        hs = _broken_hessian(u)
        area = u.mesh.areas
        lap = hs[:, 0, 0] + hs[:, 1, 1]
        lhs = float(np.sum(area * lap ** 2))
        rhs = float(np.sum(area * (hs[:, 0, 0] ** 2 + 2 * hs[:, 0, 1] ** 2 + hs[:, 1, 1] ** 2)))
        return abs(lhs - rhs) / lhs
    mesh = domain if isinstance(domain, Mesh) else triangulate(np.asarray(domain, float), h or 0.1)
    bpts = _boundary_samples(mesh)
    vals = np.abs(np.asarray(u(bpts)))
    scale_ = max(np.abs(np.asarray(u(mesh.vertices))).max(), 1e-300)
    if vals.max() > tol * scale_:
        raise NonzeroTrace("function does not vanish on the boundary")
    bary, w = collapsed_gauss(10)
    pts = np.einsum("qk,tkd->tqd", bary, mesh.coords).reshape(-1, 2)
    hs = u.hessian(pts)
    sh = (mesh.n_triangles, len(w))
    uxx, uxy, uyy = (hs[:, 0, 0].reshape(sh), hs[:, 0, 1].reshape(sh), hs[:, 1, 1].reshape(sh))
    lhs = float(np.einsum("q,t,tq->", w, mesh.areas, (uxx + uyy) ** 2))
    rhs = float(np.einsum("q,t,tq->", w, mesh.areas, uxx ** 2 + 2 * uxy ** 2 + uyy ** 2))
    return abs(lhs - rhs) / lhs


def _boundary_samples(mesh: Mesh, per_edge=5):
    e = mesh.vertices[mesh.boundary_edges]
    t = np.linspace(0.0, 1.0, per_edge)
    return (e[:, None, 0] + t[None, :, None] * (e[:, None, 1] - e[:, None, 0])).reshape(-1, 2)


# ---------------------------------------------------------------- scaling law
def scaling_exponent(s, p, n=2):
    """``||v(./eps)||_{W^{s,p}(eps U)} = eps^(-s + n/p) ||v||_{W^{s,p}(U)}`` for seminorms."""
    return -s + n / p
