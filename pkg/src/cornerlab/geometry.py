"""Sectors, pattern domains and pseudo-corner domain families.

A family glues a scaled copy ``eps * P`` of a pattern domain into the corner
of a base polygon ``Omega``.  Everything is two-dimensional and polygonal;
rounded patterns are carried as fine polylines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AngleSumViolation, EpsilonOutOfRange, GeometryMismatch

ANGLE_TOL = 1e-12
TWO_PI = 2.0 * math.pi


def _unit(angle):
    return np.array([math.cos(angle), math.sin(angle)])


def _wrap(angle):
    """Map an angle to ``[0, 2*pi)``."""
    return np.mod(angle, TWO_PI)


@dataclass(frozen=True)
class SectorSpec:
    """Plane sector of opening ``omega`` with vertex ``vertex``.

    The angular coordinate ``theta`` runs from 0 on the first edge to
    ``omega`` on the second edge, counterclockwise through the bisector.
    """

    omega: float
    bisector: tuple = (-math.sqrt(0.5), math.sqrt(0.5))
    r0: float = 1.0
    vertex: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not 0.0 < self.omega < TWO_PI:
            raise GeometryMismatch(f"sector opening {self.omega} not in (0, 2pi)")
        if self.r0 <= 0:
            raise GeometryMismatch("match radius r0 must be positive")
        b = np.asarray(self.bisector, dtype=float)
        nb = np.hypot(*b)
        if nb == 0:
            raise GeometryMismatch("bisector must be a nonzero vector")
        object.__setattr__(self, "bisector", (float(b[0] / nb), float(b[1] / nb)))
        object.__setattr__(self, "vertex", (float(self.vertex[0]), float(self.vertex[1])))

    @property
    def start_angle(self):
        """Global angle of the first edge (``theta = 0``)."""
        return math.atan2(self.bisector[1], self.bisector[0]) - 0.5 * self.omega

    def edge_direction(self, which):
        """Outward unit vector of edge 1 (``theta=0``) or edge 2 (``theta=omega``)."""
        a = self.start_angle + (0.0 if which == 1 else self.omega)
        return _unit(a)

    def polar(self, points):
        """Return ``(r, theta)`` with ``theta`` in ``[-(2pi-omega)/2, omega + (2pi-omega)/2)``."""
        p = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(self.vertex)
        r = np.hypot(p[:, 0], p[:, 1])
        gap = 0.5 * (TWO_PI - self.omega)
        theta = _wrap(np.arctan2(p[:, 1], p[:, 0]) - self.start_angle + gap) - gap
        return r, theta

    def cartesian(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        a = self.start_angle + theta
        x = self.vertex[0] + r * np.cos(a)
        y = self.vertex[1] + r * np.sin(a)
        return np.stack([x, y], axis=-1)

    def mirror(self, points):
        """Reflect points across the bisector line through the vertex."""
        p = np.asarray(points, dtype=float) - np.asarray(self.vertex)
        b = np.asarray(self.bisector)
        return 2.0 * (p @ b)[..., None] * b - p + np.asarray(self.vertex)


@dataclass(frozen=True)
class PatternSpec:
    """Pattern domain ``P`` that agrees with the sector outside ``B(R0)``.

    ``variant`` is ``"polygonal"`` (``corners`` given in boundary order, the
    first on the ``theta=omega`` edge, the last on the ``theta=0`` edge) or
    ``"rounded"`` (a circular fillet tangent to both edges at distance
    ``tangency`` from the vertex).
    """

    variant: str
    R0: float = 1.0
    corners: tuple = ()
    openings: tuple | None = None
    tangency: float | None = None

    @property
    def R0_prime(self):
        return 1.5 * self.R0

    @property
    def max_opening(self):
        if self.variant != "polygonal":
            raise GeometryMismatch("max opening is defined for polygonal patterns only")
        return max(self.openings)


def _corner_opening(d_in, d_out):
    """Interior angle of a ccw boundary turning from ``d_in`` to ``d_out``."""
    turn = math.atan2(d_in[0] * d_out[1] - d_in[1] * d_out[0], float(np.dot(d_in, d_out)))
    return math.pi - turn


def chain_corners(sector: SectorSpec, openings: Sequence[float], R0=1.0, radius_fraction=0.5):
    """Place a polygonal chain of corners with prescribed openings.

    Consecutive segments have equal length; the first corner lies on the
    ``theta=omega`` edge, the last on the ``theta=0`` edge, and the farthest
    corner sits at ``radius_fraction * R0`` from the vertex.
    """
    openings = [float(o) for o in openings]
    if len(openings) < 2:
        raise GeometryMismatch("a polygonal pattern different from the sector needs L >= 2")
    e2 = sector.edge_direction(2)
    e1 = sector.edge_direction(1)
    direction = math.atan2(-e2[1], -e2[0])
    steps = np.zeros(2)
    dirs = []
    for o in openings[:-1]:
        direction += math.pi - o
        dirs.append(_unit(direction))
        steps += dirs[-1]
    # a * e2 + steps = b * e1
    mat = np.column_stack([e2, -e1])
    a, b = np.linalg.solve(mat, -steps)
    if a <= 0 or b <= 0:
        raise GeometryMismatch("openings do not close a chain between the sector edges")
    pts = [a * e2]
    for d in dirs:
        pts.append(pts[-1] + d)
    pts = np.array(pts)
    scale = radius_fraction * R0 / np.max(np.hypot(pts[:, 0], pts[:, 1]))
    return [tuple(p) for p in pts * scale + np.asarray(sector.vertex)]


def _fillet_points(sector: SectorSpec, tangency, tol):
    """Polyline of a circular fillet, chord sagitta at most ``tol``."""
    beta = TWO_PI - sector.omega
    b = -np.asarray(sector.bisector)
    center = np.asarray(sector.vertex) + b * tangency / math.cos(0.5 * beta)
    radius = tangency * math.tan(0.5 * beta)
    t2 = np.asarray(sector.vertex) + tangency * sector.edge_direction(2)
    t1 = np.asarray(sector.vertex) + tangency * sector.edge_direction(1)
    a2 = math.atan2(*(t2 - center)[::-1])
    a1 = math.atan2(*(t1 - center)[::-1])
    sweep = sector.omega - math.pi
    # boundary turns right along the fillet: the center angle decreases
    if abs(_wrap(a2 - a1) - sweep) > 1e-9:
        a1 = a2 - sweep
    step = 2.0 * math.acos(max(-1.0, 1.0 - tol / radius)) if tol < radius else sweep
    n = max(2, int(math.ceil(sweep / step)))
    angles = a2 - sweep * np.arange(n + 1) / n
    pts = center + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    pts[0], pts[-1] = t2, t1
    return pts


def pattern_boundary(sector: SectorSpec, pattern: PatternSpec):
    """Points replacing the vertex in a boundary loop, in ccw order."""
    if pattern.variant == "polygonal":
        return np.array(pattern.corners, dtype=float)
    return _fillet_points(sector, pattern.tangency, 1e-3 * pattern.R0)


@dataclass(frozen=True)
class Region:
    """A disk-truncated polygonal region, e.g. the corner layer ``eps*Q``."""

    center: tuple
    radius: float
    polygon: np.ndarray
    exact_area: float

    def contains(self, points, tol=1e-12):
        p = np.atleast_2d(points)
        d = np.hypot(p[:, 0] - self.center[0], p[:, 1] - self.center[1])
        inside_disk = d <= self.radius * (1 + tol)
        return inside_disk & point_in_polygon(p, self.polygon, tol * self.radius)

    def area(self):
        return self.exact_area


@dataclass
class PolygonDomain:
    """Simple polygon given by a ccw vertex loop."""

    vertices: np.ndarray
    sector: SectorSpec | None = None
    eps: float = 0.0
    layer_radius: float = 0.0
    annulus: tuple = (0.0, 0.0)
    small_corners: tuple = ()

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if polygon_area(self.vertices) <= 0:
            raise GeometryMismatch("vertex loop must be counterclockwise")

    @property
    def openings(self):
        v = self.vertices
        prev = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        out = []
        for a, b, c in zip(prev, v, nxt):
            out.append(_corner_opening(b - a, c - b))
        return np.array(out)

    @property
    def reentrant(self):
        return self.openings > math.pi + 1e-9

    def area(self):
        return polygon_area(self.vertices)

    def diameter(self):
        v = self.vertices
        return float(np.max(np.hypot(*(v[:, None, :] - v[None, :, :]).transpose(2, 0, 1))))

    def contains(self, points, tol=1e-12):
        return point_in_polygon(np.atleast_2d(points), self.vertices, tol * self.diameter())


@dataclass
class DomainFamily:
    base: np.ndarray
    sector: SectorSpec
    pattern: PatternSpec
    eps0: float = field(init=False)

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.eps0 = self.sector.r0 / self.pattern.R0

    def vertex_index(self):
        d = np.hypot(*(self.base - np.asarray(self.sector.vertex)).T)
        return int(np.argmin(d))

    @property
    def is_mirror_symmetric(self):
        """True when base polygon and pattern are symmetric about the bisector."""
        def same_set(a, b):
            if len(a) != len(b):
                return False
            d = np.hypot(*(a[:, None, :] - b[None, :, :]).transpose(2, 0, 1))
            return bool(np.all(d.min(axis=1) < 1e-12 * max(1.0, np.abs(a).max())))

        base_ok = same_set(self.base, self.sector.mirror(self.base))
        pts = pattern_boundary(self.sector, self.pattern)
        return base_ok and same_set(pts, self.sector.mirror(pts))


def polygon_area(vertices):
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(points, polygon, tol=0.0):
    """Even-odd test; points within ``tol`` of the boundary count as inside."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(polygon, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0)
    x = p[:, 0][:, None]
    y = p[:, 1][:, None]
    cond = (a[:, 1] > y) != (b[:, 1] > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
    inside = np.sum(cond & (x < xint), axis=1) % 2 == 1
    if tol > 0:
        inside |= segment_distance(p, a, b).min(axis=1) <= tol
    return inside


def segment_distance(points, a, b):
    """Distances ``(n_points, n_segments)`` from points to segments ``a->b``."""
    p = np.atleast_2d(points)[:, None, :]
    ab = (b - a)[None, :, :]
    t = np.sum((p - a[None]) * ab, axis=-1) / np.maximum(np.sum(ab * ab, axis=-1), 1e-300)
    t = np.clip(t, 0.0, 1.0)
    proj = a[None] + t[..., None] * ab
    return np.hypot(*(p - proj).transpose(2, 0, 1))


def lshape():
    """Unit L-shape ``(-1,1)^2`` minus the fourth quadrant, corner 3pi/2 at 0."""
    return np.array([[0, 0], [1, 0], [1, 1], [-1, 1], [-1, -1], [0, -1]], dtype=float)


def sector_polygon(sector: SectorSpec):
    """Generic base polygon: the sector truncated by a polygon outside ``B(r0)``."""
    n = int(math.ceil(sector.omega / (0.5 * math.pi)))
    ang = np.linspace(0.0, sector.omega, n + 1)
    outer = sector.cartesian(np.full(n + 1, 2.0 * sector.r0), ang)
    return np.vstack([np.asarray(sector.vertex)[None, :], outer])


def _check_base(base, sector: SectorSpec):
    idx = int(np.argmin(np.hypot(*(base - np.asarray(sector.vertex)).T)))
    if np.hypot(*(base[idx] - np.asarray(sector.vertex))) > 1e-12:
        raise GeometryMismatch("base polygon has no vertex at the sector vertex")
    prev = base[idx - 1]
    nxt = base[(idx + 1) % len(base)]
    e2 = sector.edge_direction(2)
    e1 = sector.edge_direction(1)
    v = np.asarray(sector.vertex)
    for p, e in ((prev, e2), (nxt, e1)):
        d = p - v
        if abs(d[0] * e[1] - d[1] * e[0]) > 1e-12 * np.hypot(*d) or d @ e <= 0:
            raise GeometryMismatch("base polygon edges at the vertex do not follow the sector")
    # nothing else of the boundary may enter B(r0)
    others = np.array([i for i in range(len(base)) if i != idx])
    a = base
    b = np.roll(base, -1, axis=0)
    seg_ids = [i for i in range(len(base)) if i not in (idx, (idx - 1) % len(base))]
    dist = segment_distance(v[None, :], a[seg_ids], b[seg_ids]).min()
    near = min(np.hypot(*(prev - v)), np.hypot(*(nxt - v)))
    if others.size and (dist < sector.r0 * (1 - 1e-12) or near < sector.r0 * (1 - 1e-12)):
        raise GeometryMismatch("base polygon differs from the sector inside B(r0)")


def build_family(base, sector: SectorSpec, pattern: PatternSpec) -> DomainFamily:
    """Validate the ingredients and assemble a :class:`DomainFamily`."""
    base = np.asarray(base, dtype=float)
    _check_base(base, sector)
    if pattern.R0 <= 0:
        raise GeometryMismatch("pattern match radius R0 must be positive")
    v = np.asarray(sector.vertex)
    if pattern.variant == "polygonal":
        corners = np.asarray(pattern.corners, dtype=float)
        if corners.ndim != 2 or len(corners) < 1:
            raise GeometryMismatch("polygonal pattern needs at least one corner")
        if pattern.openings is not None:
            openings = [float(o) for o in pattern.openings]
            if len(openings) != len(corners):
                raise GeometryMismatch("one opening per corner is required")
            excess = sum(o - math.pi for o in openings) - (sector.omega - math.pi)
            if abs(excess) > ANGLE_TOL:
                raise AngleSumViolation(
                    f"sum(varpi - pi) differs from omega - pi by {excess:.3e} rad")
        geo = _chain_openings(sector, corners)
        if len(corners) == 1 or np.allclose(corners, v[None, :], atol=1e-14):
            raise GeometryMismatch("pattern coincides with the sector")
        if pattern.openings is not None and np.max(np.abs(np.array(openings) - geo)) > 1e-9:
            raise GeometryMismatch("corner openings do not match the corner positions")
        if np.any(np.hypot(*(corners - v).T) > pattern.R0 * (1 + 1e-12)):
            raise GeometryMismatch("pattern corners must lie in B(R0)")
        if np.any(geo <= math.pi) or np.any(geo >= TWO_PI):
            raise GeometryMismatch("pattern corners must be nonconvex")
        excess = float(np.sum(geo - math.pi) - (sector.omega - math.pi))
        if abs(excess) > ANGLE_TOL:
            raise AngleSumViolation(f"angle-sum identity violated by {excess:.3e} rad")
        pattern = PatternSpec("polygonal", pattern.R0, tuple(map(tuple, corners)),
                              tuple(float(g) for g in geo), None)
    elif pattern.variant == "rounded":
        t = pattern.tangency
        if t is None or not 0 < t <= pattern.R0:
            raise GeometryMismatch("fillet tangency distance must lie in (0, R0]")
        if sector.omega <= math.pi:
            raise GeometryMismatch("a fillet pattern needs a nonconvex sector")
    else:
        raise GeometryMismatch(f"unknown pattern variant {pattern.variant!r}")
    return DomainFamily(base, sector, pattern)


def _chain_openings(sector: SectorSpec, corners):
    v = np.asarray(sector.vertex)
    e1 = sector.edge_direction(1)
    e2 = sector.edge_direction(2)
    c0, cl = corners[0] - v, corners[-1] - v
    for c, e in ((c0, e2), (cl, e1)):
        if abs(c[0] * e[1] - c[1] * e[0]) > 1e-12 * max(1.0, np.hypot(*c)) or c @ e < -1e-14:
            raise GeometryMismatch("end corners of the pattern must lie on the sector edges")
    pts = np.vstack([corners[0] + e2, corners, corners[-1] + e1])
    out = []
    for k in range(1, len(pts) - 1):
        out.append(_corner_opening(pts[k] - pts[k - 1], pts[k + 1] - pts[k]))
    return np.array(out)


def fig2_family(R0=1.0, radius_fraction=0.5):
    """L-shape with its 3pi/2 corner split into two 5pi/4 corners."""
    sector = SectorSpec(1.5 * math.pi, r0=1.0)
    corners = chain_corners(sector, [1.25 * math.pi] * 2, R0, radius_fraction)
    pattern = PatternSpec("polygonal", R0, tuple(corners), (1.25 * math.pi,) * 2)
    return build_family(lshape(), sector, pattern)


def instantiate(family: DomainFamily, eps) -> PolygonDomain:
    """The domain ``Omega_eps``; ``eps = 0`` returns the base polygon."""
    if not 0.0 <= eps < family.eps0:
        raise EpsilonOutOfRange(f"eps={eps} outside [0, {family.eps0})")
    sector, pattern = family.sector, family.pattern
    idx = family.vertex_index()
    if eps == 0.0:
        return PolygonDomain(family.base.copy(), sector, 0.0, 0.0,
                             (0.0, sector.r0), ())
    v = np.asarray(sector.vertex)
    pts = v + eps * (pattern_boundary(sector, pattern) - v)
    loop = np.vstack([family.base[:idx], pts, family.base[idx + 1:]])
    small = tuple(map(tuple, pts)) if pattern.variant == "polygonal" else ()
    return PolygonDomain(loop, sector, float(eps), 1.5 * eps * pattern.R0,
                         (eps * pattern.R0, sector.r0), small)


def pattern_region(family: DomainFamily, radius, n_arc=256):
    """``P ∩ B(radius)`` for ``radius >= R0`` as a :class:`Region`."""
    sector, pattern = family.sector, family.pattern
    v = np.asarray(sector.vertex)
    inner = pattern_boundary(sector, pattern)
    big = radius * 1.01 / math.cos(0.5 * sector.omega / n_arc)
    arc = sector.cartesian(np.full(n_arc + 1, big), np.linspace(0, sector.omega, n_arc + 1))
    poly = np.vstack([arc, inner])
    fill = polygon_area(np.vstack([v[None, :], inner[::-1]]))
    area = 0.5 * sector.omega * radius ** 2 + abs(fill)
    return Region(tuple(v), float(radius), poly, area)


def corner_layer(family: DomainFamily, eps) -> Region:
    """The corner layer ``eps * Q`` with ``Q = P ∩ B(1.5 R0)``."""
    if not 0.0 < eps < family.eps0:
        raise EpsilonOutOfRange(f"eps={eps} outside (0, {family.eps0})")
    q = pattern_region(family, family.pattern.R0_prime)
    v = np.asarray(q.center)
    return Region(q.center, eps * q.radius, v + eps * (q.polygon - v), eps ** 2 * q.exact_area)


def family_to_dict(family: DomainFamily):
    p = family.pattern
    out = {
        "omega": family.sector.omega,
        "r0": family.sector.r0,
        "bisector": list(family.sector.bisector),
        "base": family.base.tolist(),
        "pattern": {"variant": p.variant, "R0": p.R0},
    }
    if p.variant == "polygonal":
        out["pattern"]["corners"] = [list(c) for c in p.corners]
        out["pattern"]["openings"] = list(p.openings)
    else:
        out["pattern"]["tangency"] = p.tangency
    return out


def family_from_dict(cfg) -> DomainFamily:
    """Build a family from a JSON-style mapping.

    ``pattern.corners`` may be omitted when ``pattern.openings`` is given;
    the corners are then placed by :func:`chain_corners`.
    """
    omega = float(cfg.get("omega", 1.5 * math.pi))
    r0 = float(cfg.get("r0", 1.0))
    kwargs = {"r0": r0}
    if "bisector" in cfg:
        kwargs["bisector"] = tuple(cfg["bisector"])
    sector = SectorSpec(omega, **kwargs)
    if "base" in cfg:
        base = np.asarray(cfg["base"], dtype=float)
    elif abs(omega - 1.5 * math.pi) < ANGLE_TOL and r0 == 1.0 and "bisector" not in cfg:
        base = lshape()
    else:
        base = sector_polygon(sector)
    pc = cfg.get("pattern", {})
    variant = pc.get("variant", "polygonal")
    R0 = float(pc.get("R0", 1.0))
    if variant == "polygonal":
        openings = pc.get("openings")
        corners = pc.get("corners")
        if corners is None:
            if openings is None:
                openings = [1.25 * math.pi] * 2
            corners = chain_corners(sector, openings, R0, float(pc.get("radius_fraction", 0.5)))
        pattern = PatternSpec("polygonal", R0, tuple(map(tuple, corners)),
                              None if openings is None else tuple(openings))
    else:
        pattern = PatternSpec("rounded", R0, tangency=float(pc.get("tangency", 0.5 * R0)))
    return build_family(base, sector, pattern)
