"""Corner singularity coefficients, canonical profiles and corner splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cutoffs
from . import fem
from . import meshing
from .errors import (
    CornerMismatch,
    NotInSector,
    OverlappingCutoffs,
    PointOutside,
    RadiusOutOfRange,
    RhoOutOfRange,
    TruncationTooSmall,
)
from .geometry import DomainFamily, SectorSpec, instantiate, segment_distance
from .quadrature import composite_gauss
from .spectral import SingularFunction, angular, exponents_sector

ARC_PANELS, ARC_POINTS = 8, 8


# ---------------------------------------------------------------- analytic input
class SingularSum:
    """``sum_j c_j h_j^+`` in a sector frame, with gradient and Hessian."""

    def __init__(self, frame: SectorSpec, coeffs, extend=False):
        self.frame = frame
        self.coeffs = {int(j): float(c) for j, c in dict(coeffs).items()}
        exps = exponents_sector(frame.omega, max(self.coeffs, default=0))
        self.terms = [(c, SingularFunction(exps[j - 1], frame, extend)) for j, c in self.coeffs.items()]

    def __call__(self, points):
        n = len(np.atleast_2d(points))
        return sum((c * h(points) for c, h in self.terms), np.zeros(n))

    def grad(self, points):
        n = len(np.atleast_2d(points))
        return sum((c * h.grad(points) for c, h in self.terms), np.zeros((n, 2)))

    def hessian(self, points):
        n = len(np.atleast_2d(points))
        return sum((c * h.hessian(points) for c, h in self.terms), np.zeros((n, 2, 2)))


def _radial_rule(rho, levels=60, ratio=0.5, points=10):
    """Geometric composite Gauss rule on (0, rho] for algebraic singularities at 0."""
    x, w = np.polynomial.legendre.leggauss(points)
    hi = rho * ratio ** np.arange(levels)
    lo = hi * ratio
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def sector_energy(u, frame: SectorSpec, rho):
    """``int_{Gamma ∩ B(rho)} |grad u|^2`` for an analytic ``u`` with ``.grad``."""
    r, wr = _radial_rule(rho)
    th, wt = composite_gauss(0.0, frame.omega, ARC_PANELS, ARC_POINTS)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    pts = frame.cartesian(rr.ravel(), tt.ravel())
    g = u.grad(pts)
    sq = np.sum(g * g, axis=1).reshape(rr.shape)
    return float(np.einsum("i,j,ij->", wr * r, wt, sq))


# ---------------------------------------------------------------- coefficients
@dataclass
class CoefficientEstimate:
    j: int
    value: float
    rho: np.ndarray
    values: np.ndarray
    spread: float


def default_rho_grid(r0, count=8):
    return r0 * np.geomspace(0.1, 0.5, count)


def _arc_values(u, frame: SectorSpec, rho, theta):
    pts = frame.cartesian(np.full(theta.shape, rho), theta)
    if isinstance(u, fem.FemField):
        try:
            return fem.evaluate(u, pts)
        except PointOutside as exc:
            raise NotInSector(f"arc of radius {rho:g} leaves the mesh") from exc
    return np.asarray(u(pts), dtype=float)


def extract_coefficient(u, frame: SectorSpec, j, rho_grid=None) -> CoefficientEstimate:
    """``c_j(u) = rho^{-lam_j} int_0^omega u(rho, theta) psi_j(theta) dtheta``.

    ``u`` is a :class:`~cornerlab.fem.FemField` or any callable on points.
    """
    if j < 1:
        raise ValueError("j must be at least 1")
    rho = default_rho_grid(frame.r0) if rho_grid is None else np.asarray(rho_grid, dtype=float)
    if rho.ndim == 0:
        rho = rho[None]
    if np.any(rho <= 0) or np.any(rho > 0.5 * frame.r0 * (1 + 1e-12)):
        raise RhoOutOfRange(f"radii must lie in (0, r0/2] = (0, {0.5 * frame.r0:g}]")
    if np.any(np.diff(rho) <= 0):
        raise ValueError("rho grid must be strictly increasing")
    lam = j * math.pi / frame.omega
    th, wt = composite_gauss(0.0, frame.omega, ARC_PANELS, ARC_POINTS)
    psi = angular(frame.omega, j, th)
    vals = np.array([rho_k ** -lam * np.dot(wt, _arc_values(u, frame, rho_k, th) * psi)
                     for rho_k in rho])
    mean = float(vals.mean())
    span = float(vals.max() - vals.min())
    if mean != 0:
        spread = span / abs(mean)
    else:
        spread = 0.0 if span == 0 else math.inf
    return CoefficientEstimate(j, mean, rho, vals, spread)


def parseval_residual(u, frame: SectorSpec, J, rho):
    """Relative gap between ``sum_j lam_j rho^(2 lam_j) c_j^2`` and the energy on ``B(rho)``."""
    if isinstance(u, fem.FemField):
        e = fem.energy(u, ("disk", frame.vertex, rho))
    else:
        e = sector_energy(u, frame, rho)
    if e == 0:
        return 0.0
    s = 0.0
    for j in range(1, J + 1):
        lam = j * math.pi / frame.omega
        c = extract_coefficient(u, frame, j, [rho]).value
        s += lam * rho ** (2 * lam) * c * c
    return abs(s - e) / e


# ---------------------------------------------------------------- profiles
@dataclass(frozen=True)
class DeltaCutoffSingular:
    """``Delta(chi h_j)`` for a radial C^2 ramp ``chi`` between ``a`` and ``b``."""

    frame: SectorSpec
    j: int
    a: float
    b: float
    rising: bool = True

    def __call__(self, points):
        r, th = self.frame.polar(points)
        _, d1, d2 = cutoffs.ramp(r, self.a, self.b, self.rising)
        lam = self.j * math.pi / self.frame.omega
        psi = angular(self.frame.omega, self.j, np.clip(th, 0, self.frame.omega))
        with np.errstate(divide="ignore", invalid="ignore"):
            val = psi * r ** lam * (d2 + (1.0 + 2.0 * lam) * d1 / r)
        return np.where(r > 0, val, 0.0)

    def lifting(self, points):
        r, th = self.frame.polar(points)
        chi = cutoffs.ramp(r, self.a, self.b, self.rising)[0]
        lam = self.j * math.pi / self.frame.omega
        return chi * r ** lam * angular(self.frame.omega, self.j, np.clip(th, 0, self.frame.omega))


@dataclass
class CanonicalProfile:
    family: DomainFamily
    j: int
    field: fem.FemField
    R_art: float
    truncation_error: float
    cutoff: tuple = (1.0, 2.0)


def canonical_profile(family: DomainFamily, j, R_art=64.0, budget=None, order=2,
                      cutoff=None, lifting="discrete") -> CanonicalProfile:
    """``K_j = Phi h_j + w`` on ``P ∩ B(R_art)`` with ``w = 0`` on ``∂P`` and at ``R_art``.

    With ``lifting="discrete"`` the correction solves ``a(w, v) = -a(I(Phi h_j), v)``,
    which makes ``K_j`` discrete harmonic.  ``lifting="continuous"`` loads
    ``-Delta(Phi h_j)`` instead.  ``cutoff`` gives the transition radii of
    ``Phi`` in units of ``R0`` (default ``(1, 2)``).
    """
    pattern = family.pattern
    R0 = pattern.R0
    if R_art < 4 * R0:
        raise TruncationTooSmall(f"R_art = {R_art:g} must be at least 4 R0 = {4 * R0:g}")
    a, b = cutoff or (1.0, 2.0)
    if not (1.0 <= a < b) or b * R0 >= R_art:
        raise ValueError("cutoff radii must satisfy R0 <= a < b < R_art")
    frame = SectorSpec(family.sector.omega, family.sector.bisector, R_art, family.sector.vertex)
    mesh = meshing.profile_mesh(family, R_art, budget)
    spec = DeltaCutoffSingular(frame, j, a * R0, b * R0, rising=True)
    sp_ = fem.space(mesh, order)
    lift = spec.lifting(sp_.dof_coords)
    free = ~sp_.dirichlet
    if lifting == "discrete":
        rhs_vec = -(sp_.stiffness @ lift)
        w = _solve_free(sp_, rhs_vec)
    elif lifting == "continuous":
        w = fem.solve_dirichlet(mesh, lambda p: -spec(p), order).values
    else:
        raise ValueError(f"unknown lifting {lifting!r}")
    k = lift + w
    # exact zero trace on the pattern boundary, exact h_j on the artificial circle
    r = np.hypot(*(sp_.dof_coords - np.asarray(family.sector.vertex)).T)
    outer = sp_.dirichlet & (r > 0.5 * (R_art + b * R0))
    k[sp_.dirichlet & ~outer] = 0.0
    field_ = fem.FemField(mesh, order, k, sp_.dirichlet)
    trunc = (R0 / R_art) ** (math.pi / family.sector.omega)
    return CanonicalProfile(family, j, field_, R_art, trunc, (a, b))


def _solve_free(sp_, rhs_vec):
    import scipy.sparse.linalg as spla

    free = ~sp_.dirichlet
    a = sp_.stiffness[free][:, free].tocsc()
    x = spla.spsolve(a, rhs_vec[free])
    out = np.zeros(sp_.n_dofs)
    out[free] = x
    return out


def l2_norm(field_: fem.FemField, region=None, degree=6):
    mask = meshing.region_mask(field_.mesh, region)
    bary, w = fem.triangle_rule(degree)
    vals = field_.values_at(bary)[mask]
    return float(math.sqrt(np.einsum("q,t,tq->", w, field_.mesh.areas[mask], vals * vals)))


def h1_bound_ratio(profile: CanonicalProfile, R):
    """``(R |K|_{H1(B_R)} + ||K||_{L2(B_R)}) / ((lam+1)^(1/2) R^(lam+1))``."""
    R0 = profile.family.pattern.R0
    if not (2 * R0 * (1 - 1e-12) <= R <= 0.5 * profile.R_art * (1 + 1e-12)):
        raise RadiusOutOfRange(f"R must lie in [2 R0, R_art/2], got {R:g}")
    region = ("disk", profile.family.sector.vertex, R)
    grad = math.sqrt(fem.energy(profile.field, region))
    val = l2_norm(profile.field, region)
    lam = profile.j * math.pi / profile.family.sector.omega
    return (R * grad + val) / (math.sqrt(lam + 1.0) * R ** (lam + 1.0))


def cone_h1_ratio(lam):
    """Value of the ratio for ``h_j`` itself on a full sector."""
    return (math.sqrt(lam) + 1.0 / math.sqrt(2 * lam + 2)) / math.sqrt(lam + 1)


def profile_deviation(p1: CanonicalProfile, p2: CanonicalProfile):
    """Max dof difference of two profiles on the same mesh, relative to max |K|."""
    if p1.field.values.shape != p2.field.values.shape:
        raise ValueError("profiles live on different meshes")
    return float(np.abs(p1.field.values - p2.field.values).max() / np.abs(p1.field.values).max())


# ---------------------------------------------------------------- splitting
@dataclass
class CornerSplit:
    d: np.ndarray
    regular: fem.FemField
    radii: list
    frames: list = field(default_factory=list)
    estimates: list = field(default_factory=list)


def _corner_frames(family: DomainFamily, eps):
    dom = instantiate(family, eps)
    v = dom.vertices
    n = len(v)
    corners = eps * np.asarray(family.pattern.corners, dtype=float) + np.asarray(family.sector.vertex)
    frames = []
    for c in corners:
        d = np.hypot(*(v - c).T)
        i = int(np.argmin(d))
        if d[i] > 1e-12 * max(1.0, eps):
            raise CornerMismatch("pattern corner is not a vertex of the domain")
        prev, nxt = v[i - 1], v[(i + 1) % n]
        a0 = math.atan2(*(nxt - c)[::-1])
        a1 = math.atan2(*(prev - c)[::-1])
        alpha = (a1 - a0) % (2 * math.pi)
        mid = a0 + 0.5 * alpha
        others = [k for k in range(n) if k not in (i, (i - 1) % n)]
        clear = segment_distance(c[None], v[others], v[[(k + 1) % n for k in others]]).min()
        # harmonic radius: the local sector ends at the nearer end of the incident edges
        harm = min(clear, np.hypot(*(nxt - c)), np.hypot(*(prev - c)))
        frames.append(SectorSpec(alpha, (math.cos(mid), math.sin(mid)), 2 * harm, tuple(c)))
    return frames


class SmallCornerSingular:
    """``d Psi S`` with ``S = R^(pi/varpi) psi_1`` in the local frame."""

    def __init__(self, frame: SectorSpec, d, a, b):
        self.frame, self.d, self.a, self.b = frame, d, a, b
        self.h = SingularFunction(exponents_sector(frame.omega, 1)[0], frame, extend=True)

    def __call__(self, points):
        r, th = self.frame.polar(points)
        psi = cutoffs.ramp(r, self.a, self.b, rising=False)[0]
        inside = (th >= -1e-12) & (th <= self.frame.omega + 1e-12)
        return np.where(inside & (r < self.b), self.d * psi * self.h(points), 0.0)


def split_at_small_corners(u: fem.FemField, family: DomainFamily, eps, cutoff_radii=None,
                           rho_grid=None) -> CornerSplit:
    """Coefficients ``d_l`` of the local singular functions at the corners ``eps O_l``.

    ``rho_grid`` and ``cutoff_radii`` are fractions of the harmonic radius
    of each corner (defaults: 8 radii in [0.1, 0.5] and ``(0.25, 0.5)``).
    """
    frames = _corner_frames(family, eps)
    rho_f = np.geomspace(0.1, 0.5, 8) if rho_grid is None else np.asarray(rho_grid, dtype=float)
    ca, cb = cutoff_radii or (0.25, 0.5)
    if not 0 < ca < cb:
        raise ValueError("cutoff radii must satisfy 0 < a < b")
    harm = [f.r0 / 2 for f in frames]
    radii = [(ca * h, cb * h) for h in harm]
    centers = np.array([f.vertex for f in frames])
    for i in range(len(frames)):
        for k in range(i + 1, len(frames)):
            if np.hypot(*(centers[i] - centers[k])) < radii[i][1] + radii[k][1]:
                raise OverlappingCutoffs("cutoff disks of two corners intersect")
        if np.hypot(*(centers[i] - np.asarray(family.sector.vertex))) + radii[i][1] \
                > eps * family.pattern.R0_prime:
            raise OverlappingCutoffs("cutoff disk leaves the corner layer")
    if cb > 1.0 + 1e-12:
        raise OverlappingCutoffs("cutoff radius exceeds the harmonic neighbourhood")
    ds, ests = [], []
    for f, h in zip(frames, harm):
        est = extract_coefficient(u, f, 1, rho_f * h)
        ds.append(est.value)
        ests.append(est)
    sing = [SmallCornerSingular(f, d, a, b) for f, d, (a, b) in zip(frames, ds, radii)]
    s = fem.space(u.mesh, u.order)
    total = sum(g(s.dof_coords) for g in sing)
    reg = fem.FemField(u.mesh, u.order, u.values - total, s.dirichlet)
    return CornerSplit(np.array(ds), reg, radii, frames, ests)
