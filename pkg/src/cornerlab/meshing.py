"""Corner-graded conforming triangulations.

Two builders are provided.  :func:`triangulate` meshes an arbitrary simple
polygon by constrained Delaunay refinement (``triangle``) after inserting
geometric rings of points around the graded corners.  The layered builders
(:func:`family_mesh`, :func:`profile_mesh`) glue an exactly scaled pattern
mesh, structured polar bands and an unstructured outer part, so that the
mesh of ``eps*Q`` is the same similarity image for every ``eps``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import triangle as tr
from scipy.spatial import cKDTree

from .errors import EmptyRegion, MeshFailure, PointOutside
from .geometry import (
    DomainFamily,
    PolygonDomain,
    Region,
    SectorSpec,
    pattern_boundary,
    point_in_polygon,
    polygon_area,
    segment_distance,
)

FAR, ANNULUS, LAYER = 0, 1, 2
TAG_NAMES = {"far": FAR, "annulus": ANNULUS, "layer": LAYER}
MIN_ANGLE = 15.0


@dataclass(frozen=True)
class Grading:
    ratio: float = 0.5
    layers: int = 0


@dataclass
class Mesh:
    vertices: np.ndarray
    triangles: np.ndarray
    tags: np.ndarray | None = None
    gradings: tuple = ()
    parent: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.tags is None:
            self.tags = np.zeros(len(self.triangles), dtype=np.int8)
        self.tags = np.asarray(self.tags, dtype=np.int8)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @cached_property
    def coords(self):
        """Vertex coordinates per triangle, shape ``(T, 3, 2)``."""
        return self.vertices[self.triangles]

    @cached_property
    def areas(self):
        c = self.coords
        d1 = c[:, 1] - c[:, 0]
        d2 = c[:, 2] - c[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @cached_property
    def barycenters(self):
        return self.coords.mean(axis=1)

    @cached_property
    def edge_data(self):
        """Unique edges and the ``(T, 3)`` map of local edges (01, 12, 20)."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        e.sort(axis=1)
        uniq, inv, counts = np.unique(e, axis=0, return_inverse=True, return_counts=True)
        local = inv.reshape(3, -1).T
        return uniq, local, counts

    @property
    def edges(self):
        return self.edge_data[0]

    @cached_property
    def boundary_edges(self):
        uniq, _, counts = self.edge_data
        return uniq[counts == 1]

    @cached_property
    def boundary_vertices(self):
        return np.unique(self.boundary_edges)

    def min_angle(self):
        c = self.coords
        ang = []
        for i in range(3):
            a = c[:, (i + 1) % 3] - c[:, i]
            b = c[:, (i + 2) % 3] - c[:, i]
            cosv = np.sum(a * b, axis=1) / (np.hypot(*a.T) * np.hypot(*b.T))
            ang.append(np.degrees(np.arccos(np.clip(cosv, -1, 1))))
        return float(np.min(ang))

    def edge_lengths(self):
        v = self.vertices[self.edges]
        return np.hypot(*(v[:, 1] - v[:, 0]).T)

    @cached_property
    def _tree(self):
        return cKDTree(self.barycenters)

    def locate(self, points, tol=1e-10):
        """Containing triangle and barycentric coordinates of each point.

        Points outside the mesh get triangle index ``-1``.
        """
        p = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(p)
        tri = np.full(n, -1, dtype=np.int64)
        bary = np.zeros((n, 3))
        k = min(16, self.n_triangles)
        _, cand = self._tree.query(p, k=k)
        cand = cand.reshape(n, k)
        for j in range(k):
            todo = tri < 0
            if not np.any(todo):
                break
            c = cand[todo, j]
            b = self._bary(c, p[todo])
            ok = np.all(b >= -tol, axis=1)
            idx = np.flatnonzero(todo)[ok]
            tri[idx] = c[ok]
            bary[idx] = b[ok]
        rest = np.flatnonzero(tri < 0)
        if rest.size:
            lo = self.coords.min(axis=1)
            hi = self.coords.max(axis=1)
            for i in rest:
                q = p[i]
                slack = tol * (1.0 + np.abs(q).max())
                c = np.flatnonzero(np.all((lo - slack <= q) & (q <= hi + slack), axis=1))
                if c.size == 0:
                    continue
                b = self._bary(c, np.repeat(q[None], c.size, axis=0))
                score = b.min(axis=1)
                best = int(np.argmax(score))
                if score[best] >= -tol:
                    tri[i] = c[best]
                    bary[i] = b[best]
        return tri, bary

    def _bary(self, tri, p):
        c = self.coords[tri]
        d1 = c[:, 1] - c[:, 0]
        d2 = c[:, 2] - c[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        q = p - c[:, 0]
        l1 = (q[:, 0] * d2[:, 1] - q[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * q[:, 1] - d1[:, 1] * q[:, 0]) / det
        return np.column_stack([1.0 - l1 - l2, l1, l2])

    def locate_strict(self, points):
        tri, bary = self.locate(points)
        if np.any(tri < 0):
            raise PointOutside(f"{int(np.sum(tri < 0))} point(s) outside the mesh")
        return tri, bary


def check_mesh(mesh: Mesh, polygon=None, min_angle=MIN_ANGLE):
    """Raise :class:`MeshFailure` unless the mesh is valid and conforming."""
    if np.any(mesh.areas <= 0):
        raise MeshFailure("triangle with non-positive area")
    _, _, counts = mesh.edge_data
    if np.any(counts > 2):
        raise MeshFailure("edge shared by more than two triangles")
    ma = mesh.min_angle()
    if ma < min_angle:
        raise MeshFailure(f"minimum angle {ma:.2f} deg below {min_angle} deg")
    if polygon is not None:
        area = polygon_area(polygon)
        if abs(mesh.areas.sum() - area) > 1e-9 * abs(area):
            raise MeshFailure("mesh does not cover the polygon")
        be = mesh.vertices[mesh.boundary_edges]
        perim = np.sum(np.hypot(*(np.roll(polygon, -1, 0) - polygon).T))
        if abs(np.sum(np.hypot(*(be[:, 1] - be[:, 0]).T)) - perim) > 1e-9 * perim:
            raise MeshFailure("hanging nodes or holes detected on the boundary")
    return mesh


def _orient(vertices, triangles):
    c = vertices[triangles]
    d1 = c[:, 1] - c[:, 0]
    d2 = c[:, 2] - c[:, 0]
    neg = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    triangles = triangles.copy()
    triangles[neg] = triangles[neg][:, [0, 2, 1]]
    return triangles


def _corner_frame(poly, i):
    """Interior angle and the ccw start direction at polygon vertex ``i``."""
    c = poly[i]
    d_out = poly[(i + 1) % len(poly)] - c
    d_back = poly[i - 1] - c
    a0 = math.atan2(d_out[1], d_out[0])
    a1 = math.atan2(d_back[1], d_back[0])
    alpha = (a1 - a0) % (2 * math.pi)
    return alpha, a0


def _sample_boundary(poly, h, graded):
    """Split polygon edges to length <= h, plus geometric splits at graded corners."""
    pts = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        length = float(np.hypot(*(b - a)))
        ts = list(np.arange(1, int(math.ceil(length / h - 1e-9))) / math.ceil(length / h - 1e-9)) \
            if length > h * (1 + 1e-9) else []
        for end, sign in ((0, 1), (1, -1)):
            idx = i if end == 0 else (i + 1) % n
            if idx in graded:
                radii = graded[idx]
                for r in radii:
                    if r < 0.45 * length:
                        ts.append(r / length if end == 0 else 1 - r / length)
        ts = sorted(set(round(t, 15) for t in ts if 0 < t < 1))
        pts.append(a[None, :])
        if ts:
            t = np.array(ts)[:, None]
            pts.append(a + t * (b - a))
    return np.vstack(pts)


def _ring_points(poly, i, radii, ratio):
    alpha, a0 = _corner_frame(poly, i)
    c = poly[i]
    m = max(2, int(math.ceil(alpha / (1.0 - ratio) * 0.9)))
    out = []
    n = len(poly)
    others = [k for k in range(n) if k not in (i, (i - 1) % n)]
    a = poly[others]
    b = poly[[(k + 1) % n for k in others]]
    for r in radii:
        ang = a0 + alpha * np.arange(1, m) / m
        p = c + r * np.column_stack([np.cos(ang), np.sin(ang)])
        ok = point_in_polygon(p, poly)
        if len(others):
            ok &= segment_distance(p, a, b).min(axis=1) > 0.5 * r * (1 - ratio)
        out.append(p[ok])
    return np.vstack(out) if out else np.zeros((0, 2))


def triangulate(domain, h_max, grading: Grading | None = None, *, grade_points=None,
                min_angle=20.0, keep_boundary=False, check=True) -> Mesh:
    """Quality triangulation of a polygon with geometric grading at corners.

    ``domain`` is a :class:`PolygonDomain` or a ccw vertex array.  Graded
    corners default to the reentrant vertices; ``grade_points`` overrides
    them with explicit vertex positions.  With ``keep_boundary`` no Steiner
    points are added on the boundary beyond the sampling done here.
    """
    if h_max <= 0:
        raise ValueError("h_max must be positive")
    poly = np.asarray(domain.vertices if isinstance(domain, PolygonDomain) else domain, float)
    grading = grading or Grading()
    n = len(poly)
    if grade_points is None:
        corners = [i for i in range(n) if _corner_frame(poly, i)[0] > math.pi + 1e-9]
    else:
        gp = np.atleast_2d(np.asarray(grade_points, dtype=float)) if len(grade_points) else []
        corners = [i for i in range(n) if len(gp) and np.min(np.hypot(*(gp - poly[i]).T)) < 1e-12]
    graded = {}
    records = []
    extra = []
    if grading.layers > 0:
        for i in corners:
            radii = h_max * grading.ratio ** np.arange(1, grading.layers + 1)
            # keep rings clear of the rest of the boundary
            others = [k for k in range(n) if k not in (i, (i - 1) % n)]
            if others:
                clear = segment_distance(poly[i][None], poly[others],
                                         poly[[(k + 1) % n for k in others]]).min()
                radii = radii[radii < 0.45 * clear]
            graded[i] = radii
            extra.append(_ring_points(poly, i, radii, grading.ratio))
            records.append({"center": tuple(poly[i]), "layers": int(len(radii)),
                            "ratio": grading.ratio})
    bpts = _sample_boundary(poly, h_max, graded)
    nb = len(bpts)
    seg = np.column_stack([np.arange(nb), (np.arange(nb) + 1) % nb])
    verts = np.vstack([bpts] + extra) if extra else bpts
    area = math.sqrt(3) / 4 * h_max ** 2
    flags = f"pq{min_angle:g}a{area:.17g}Q" + ("Y" if keep_boundary else "")
    try:
        out = tr.triangulate({"vertices": verts, "segments": seg}, flags)
    except Exception as exc:  # pragma: no cover - library failure path
        raise MeshFailure(f"triangulation failed: {exc}") from exc
    v = out["vertices"]
    t = _orient(v, out["triangles"])
    mesh = Mesh(v, t, gradings=tuple(records))
    if check:
        check_mesh(mesh, poly, MIN_ANGLE)
    return mesh


def scale(mesh: Mesh, c) -> Mesh:
    """Similarity copy with every coordinate multiplied by ``c``."""
    if c <= 0:
        raise ValueError("scale factor must be positive")
    grads = tuple({**g, "center": tuple(np.asarray(g["center"]) * c)} for g in mesh.gradings)
    return Mesh(mesh.vertices * c, mesh.triangles.copy(), mesh.tags.copy(), grads)


def translate(mesh: Mesh, shift) -> Mesh:
    return Mesh(mesh.vertices + np.asarray(shift), mesh.triangles.copy(), mesh.tags.copy(),
                mesh.gradings)


def merge(*meshes: Mesh) -> Mesh:
    """Glue meshes along coincident vertices; earlier meshes keep their numbering."""
    scale_len = min(float(m.edge_lengths().min()) for m in meshes)
    tol = 1e-7 * scale_len
    verts = [meshes[0].vertices]
    tris = [meshes[0].triangles]
    tags = [meshes[0].tags]
    grads = list(meshes[0].gradings)
    count = meshes[0].n_vertices
    for m in meshes[1:]:
        base = np.vstack(verts)
        tree = cKDTree(base)
        d, idx = tree.query(m.vertices, distance_upper_bound=tol)
        new = ~np.isfinite(d)
        mapping = np.empty(m.n_vertices, dtype=np.int64)
        mapping[~new] = idx[~new]
        mapping[new] = count + np.arange(int(new.sum()))
        count += int(new.sum())
        verts.append(m.vertices[new])
        tris.append(mapping[m.triangles])
        tags.append(m.tags)
        grads.extend(m.gradings)
    return Mesh(np.vstack(verts), np.vstack(tris), np.concatenate(tags), tuple(grads))


def mirror(mesh: Mesh, frame: SectorSpec) -> Mesh:
    """Reflection across the bisector of ``frame``; orientation is restored."""
    v = frame.mirror(mesh.vertices)
    t = mesh.triangles[:, [0, 2, 1]]
    grads = tuple({**g, "center": tuple(frame.mirror(np.asarray(g["center"])))}
                  for g in mesh.gradings)
    return Mesh(v, t, mesh.tags.copy(), grads)


def polar_band(frame: SectorSpec, radii, n_theta, tag=ANNULUS) -> Mesh:
    """Structured mesh of the sector band between ``radii[0]`` and ``radii[-1]``.

    Cells are split along alternating diagonals so that the mesh is mirror
    symmetric about the bisector when ``n_theta`` is even.
    """
    radii = np.asarray(radii, dtype=float)
    nr = len(radii)
    ang = frame.omega * np.arange(n_theta + 1) / n_theta
    unit = np.column_stack([np.cos(frame.start_angle + ang), np.sin(frame.start_angle + ang)])
    v = (radii[:, None, None] * unit[None, :, :]).reshape(-1, 2) + np.asarray(frame.vertex)
    idx = np.arange(nr * (n_theta + 1)).reshape(nr, n_theta + 1)
    tris = []
    for k in range(nr - 1):
        for i in range(n_theta):
            a, b = idx[k, i], idx[k, i + 1]
            c, d = idx[k + 1, i + 1], idx[k + 1, i]
            if i < n_theta / 2:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    t = _orient(v, np.array(tris))
    return Mesh(v, t, np.full(len(t), tag, dtype=np.int8))


def sector_core(frame: SectorSpec, r_outer, n_theta, n_min=6, ratio=None, tag=ANNULUS):
    """Graded disk sector ``Gamma ∩ B(r_outer)`` down to the vertex.

    Uniform angular resolution is kept over four decades of radius; closer to the vertex the angular count is halved band by band (with the
    radial ratio adjusted to keep cells shape regular) and the innermost
    ring is fanned to the vertex.
    """
    dth = frame.omega / n_theta
    q = ratio or math.exp(dth)
    parts = []
    r = r_outer
    n = n_theta
    # uniform band: 4 decades of radius at full angular resolution
    r_stop = r_outer * 1e-4
    k = int(math.ceil(math.log(r_outer / r_stop) / math.log(q)))
    radii = r_outer * q ** (-np.arange(k + 1))[::-1]
    parts.append(polar_band(frame, radii, n, tag))
    r = radii[0]
    v0 = np.asarray(frame.vertex)
    while n % 2 == 0 and n // 2 >= n_min and (n // 2) % 2 == 0:
        # transition ring n -> n/2
        m = n // 2
        q2 = math.exp(frame.omega / m)
        r_in = r / q2 ** 0.5
        ang_o = frame.omega * np.arange(n + 1) / n
        ang_i = frame.omega * np.arange(m + 1) / m
        vo = frame.cartesian(np.full(n + 1, r), ang_o)
        vi = frame.cartesian(np.full(m + 1, r_in), ang_i)
        verts = np.vstack([vi, vo])
        tris = []
        for i in range(m):
            a, b = i, i + 1
            o0, o1, o2 = m + 1 + 2 * i, m + 2 + 2 * i, m + 3 + 2 * i
            tris += [(a, o0, o1), (a, o1, b), (b, o1, o2)]
        t = _orient(verts, np.array(tris))
        parts.append(Mesh(verts, t, np.full(len(t), tag, dtype=np.int8)))
        # one band at the coarser resolution
        radii = r_in * q2 ** (-np.arange(3))[::-1]
        parts.append(polar_band(frame, radii, m, tag))
        r = radii[0]
        n = m
    ang = frame.omega * np.arange(n + 1) / n
    ring = frame.cartesian(np.full(n + 1, r), ang)
    verts = np.vstack([v0[None, :], ring])
    t = _orient(verts, np.array([(0, i + 1, i + 2) for i in range(n)]))
    parts.append(Mesh(verts, t, np.full(len(t), tag, dtype=np.int8)))
    return merge(*parts[::-1])


def geometric_radii(r_a, r_b, ratio, anchors=()):
    """Radii from ``r_a`` to ``r_b`` growing by about ``ratio``, hitting anchors."""
    stops = [r_a] + sorted(a for a in anchors if r_a < a < r_b) + [r_b]
    out = [r_a]
    for lo, hi in zip(stops[:-1], stops[1:]):
        k = max(1, int(round(math.log(hi / lo) / math.log(ratio))))
        out.extend(lo * (hi / lo) ** (np.arange(1, k + 1) / k))
        out[-1] = hi
    return np.array(out)


def outward_radii(r_a, r_b, ratio):
    """Exact geometric radii from ``r_a`` outward; the last gap is absorbed at ``r_b``."""
    k = int(math.floor(math.log(r_b / r_a) / math.log(ratio) + 1e-9))
    radii = list(r_a * ratio ** np.arange(k + 1))
    if r_b / radii[-1] < 1 + 0.5 * (ratio - 1):
        radii[-1] = r_b
    else:
        radii.append(r_b)
    if len(radii) < 2:
        radii = [r_a, r_b]
    return np.array(radii)


def clip_halfplane(poly, point, normal):
    """Part of a polygon with ``(x - point) . normal >= 0`` (Sutherland-Hodgman)."""
    poly = np.asarray(poly, dtype=float)
    s = (poly - point) @ normal
    s[np.abs(s) < 1e-14 * (1 + np.abs(poly).max())] = 0.0
    out = []
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        sa, sb = s[i], s[(i + 1) % n]
        if sa >= 0:
            out.append(a)
        if (sa > 0 and sb < 0) or (sa < 0 and sb > 0):
            t = sa / (sa - sb)
            out.append(a + t * (b - a))
    out = np.array(out)
    # drop consecutive duplicates
    keep = np.hypot(*(out - np.roll(out, 1, 0)).T) > 1e-14 * (1 + np.abs(out).max())
    return out[keep]


def _mirror_triangulate(poly, frame, h, grading, grade_points, symmetric):
    if not symmetric:
        return triangulate(poly, h, grading, grade_points=grade_points, keep_boundary=True)
    b = np.asarray(frame.bisector)
    # keep the half on the theta < omega/2 side (towards edge 1)
    normal = np.array([b[1], -b[0]])
    half = clip_halfplane(poly, np.asarray(frame.vertex), normal)
    m1 = triangulate(half, h, grading, grade_points=grade_points, keep_boundary=True)
    return merge(m1, mirror(m1, frame))


@dataclass(frozen=True)
class MeshBudget:
    """Resolution knobs of the layered meshes.

    ``n_theta`` arc cells over the sector opening fixes the polar bands;
    the pattern mesh of ``Q`` and the outer region use matching sizes.
    """

    n_theta: int = 48
    pattern_layers: int = 8
    pattern_ratio: float = 0.5
    outer_h: float | None = None
    polar_radius: float = 0.5   # relative to r0
    far_ratio: float | None = None

    def refined(self, factor=2):
        return MeshBudget(self.n_theta * factor, self.pattern_layers + 2, self.pattern_ratio,
                          None if self.outer_h is None else self.outer_h / factor,
                          self.polar_radius, self.far_ratio)


def _q_polygon(family: DomainFamily, n_theta):
    sector, pattern = family.sector, family.pattern
    rq = pattern.R0_prime
    inner = pattern_boundary(sector, pattern)
    ang = sector.omega * np.arange(n_theta + 1) / n_theta
    arc = (rq * np.column_stack([np.cos(sector.start_angle + ang),
                                 np.sin(sector.start_angle + ang)])
           + np.asarray(sector.vertex))
    # ccw: last pattern point -> out along edge 1 -> arc -> in along edge 2 -> chain
    return np.vstack([inner[-1:], arc, inner[:-1]]) if len(inner) > 1 else np.vstack([arc, inner])


def pattern_q_mesh(family: DomainFamily, budget: MeshBudget) -> Mesh:
    """Mesh of ``Q = P ∩ B(1.5 R0)`` at pattern scale, graded at pattern corners."""
    sector, pattern = family.sector, family.pattern
    poly = _q_polygon(family, budget.n_theta)
    h = pattern.R0_prime * sector.omega / budget.n_theta
    corners = pattern.corners if pattern.variant == "polygonal" else []
    grading = Grading(budget.pattern_ratio, budget.pattern_layers if len(corners) else 0)
    mesh = _mirror_triangulate(poly, sector, h, grading, corners, family.is_mirror_symmetric)
    mesh.tags[:] = LAYER
    check_mesh(mesh, min_angle=MIN_ANGLE)
    return mesh


def _outer_mesh(family: DomainFamily, budget: MeshBudget) -> Mesh:
    sector = family.sector
    r_pol = budget.polar_radius * sector.r0
    idx = family.vertex_index()
    ang = sector.omega * np.arange(budget.n_theta + 1) / budget.n_theta
    unit = np.column_stack([np.cos(sector.start_angle + ang), np.sin(sector.start_angle + ang)])
    arc = r_pol * unit[::-1] + np.asarray(sector.vertex)
    poly = np.vstack([family.base[:idx], arc, family.base[idx + 1:]])
    h = budget.outer_h or 1.2 * r_pol * sector.omega / budget.n_theta
    mesh = _mirror_triangulate(poly, sector, h, Grading(), [], family.is_mirror_symmetric)
    r = np.hypot(*(mesh.barycenters - np.asarray(sector.vertex)).T)
    mesh.tags[:] = np.where(r < sector.r0, ANNULUS, FAR)
    return mesh


def family_mesh(family: DomainFamily, eps, budget: MeshBudget | None = None) -> Mesh:
    """Layered mesh of ``Omega_eps``.

    For ``eps > 0`` the first triangles are the scaled pattern mesh of
    ``eps*Q`` (tag ``layer``), numbered identically for every ``eps``.
    For ``eps = 0`` the corner is covered by a graded sector core.
    """
    budget = budget or MeshBudget()
    sector = family.sector
    r_pol = budget.polar_radius * sector.r0
    q = budget.far_ratio or math.exp(sector.omega / budget.n_theta)
    outer = _outer_mesh(family, budget)
    if eps == 0:
        core = sector_core(sector, r_pol, budget.n_theta)
        mesh = merge(core, outer)
    else:
        if not 0 < eps * family.pattern.R0_prime < r_pol:
            raise MeshFailure("corner layer does not fit inside the polar region")
        inner = scale_about(pattern_q_mesh(family, budget), eps, sector.vertex)
        radii = outward_radii(eps * family.pattern.R0_prime, r_pol, q)
        band = polar_band(sector, radii, budget.n_theta)
        mesh = merge(inner, band, outer)
    check_mesh(mesh, min_angle=MIN_ANGLE)
    return mesh


def scale_about(mesh: Mesh, c, center):
    center = np.asarray(center, dtype=float)
    if not np.any(center):
        return scale(mesh, c)
    return translate(scale(translate(mesh, -center), c), center)


def profile_mesh(family: DomainFamily, R_art, budget: MeshBudget | None = None,
                 anchors=None) -> Mesh:
    """Mesh of the truncated pattern ``P ∩ B(R_art)`` with rings at ``anchors``."""
    budget = budget or MeshBudget()
    sector, pattern = family.sector, family.pattern
    anchors = anchors if anchors is not None else [2 * pattern.R0, 4 * pattern.R0]
    q = budget.far_ratio or math.exp(sector.omega / budget.n_theta)
    inner = pattern_q_mesh(family, budget)
    radii = geometric_radii(pattern.R0_prime, R_art, q, anchors)
    band = polar_band(sector, radii, budget.n_theta)
    mesh = merge(inner, band)
    check_mesh(mesh, min_angle=MIN_ANGLE)
    return mesh


def submesh(mesh: Mesh, region) -> Mesh:
    """Triangles whose barycenter lies in ``region``, re-indexed.

    ``region`` may be a tag name, a :class:`Region`, a ``("disk", center,
    radius)`` or ``("annulus", center, r_in, r_out)`` tuple, a callable on
    points, or a boolean/integer selection of triangles.  The result keeps
    the selected parent triangle indices in ``parent``.
    """
    sel = region_mask(mesh, region)
    idx = np.flatnonzero(sel)
    if idx.size == 0:
        raise EmptyRegion("no triangle of the mesh lies in the region")
    t = mesh.triangles[idx]
    used, inv = np.unique(t, return_inverse=True)
    parent = idx if mesh.parent is None else mesh.parent[idx]
    return Mesh(mesh.vertices[used], inv.reshape(-1, 3), mesh.tags[idx], mesh.gradings, parent)


def region_mask(mesh: Mesh, region):
    bc = mesh.barycenters
    if region is None:
        return np.ones(mesh.n_triangles, dtype=bool)
    if isinstance(region, str):
        if region == "all":
            return np.ones(mesh.n_triangles, dtype=bool)
        return mesh.tags == TAG_NAMES[region]
    if isinstance(region, Region):
        return region.contains(bc)
    if isinstance(region, tuple) and region and isinstance(region[0], str):
        kind = region[0]
        c = np.asarray(region[1], dtype=float)
        r = np.hypot(*(bc - c).T)
        if kind == "disk":
            return r < region[2]
        if kind == "annulus":
            return (r > region[2]) & (r < region[3])
        raise ValueError(f"unknown region kind {kind!r}")
    if callable(region):
        return np.asarray(region(bc), dtype=bool)
    arr = np.asarray(region)
    if arr.dtype == bool:
        return arr
    mask = np.zeros(mesh.n_triangles, dtype=bool)
    mask[arr] = True
    return mask


def export_mesh(mesh: Mesh, path):
    """Plain-text node/element export with 0-based indices."""
    with open(path, "w") as fh:
        fh.write(f"#nodes {mesh.n_vertices}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g}\n")
        fh.write(f"#tris {mesh.n_triangles}\n")
        for (a, b, c), tag in zip(mesh.triangles, mesh.tags):
            fh.write(f"{a} {b} {c} {tag}\n")


def import_mesh(path) -> Mesh:
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    assert lines[0][0] == "#nodes"
    n = int(lines[0][1])
    v = np.array([[float(a), float(b)] for a, b in lines[1:1 + n]])
    assert lines[1 + n][0] == "#tris"
    t_rows = lines[2 + n:2 + n + int(lines[1 + n][1])]
    t = np.array([[int(r[0]), int(r[1]), int(r[2])] for r in t_rows], dtype=np.int64)
    tags = np.array([int(r[3]) if len(r) > 3 else 0 for r in t_rows], dtype=np.int8)
    return Mesh(v, t, tags)


def rectangle_mesh(n, lower=(0.0, 0.0), upper=(1.0, 1.0)) -> Mesh:
    """Uniform ``n x n`` cell mesh, each cell cut along its main diagonal."""
    x = np.linspace(lower[0], upper[0], n + 1)
    y = np.linspace(lower[1], upper[1], n + 1)
    xx, yy = np.meshgrid(x, y, indexing="xy")
    v = np.column_stack([xx.ravel(), yy.ravel()])
    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, 1:].ravel(), idx[1:, :-1].ravel()
    t = np.vstack([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return Mesh(v, t)
