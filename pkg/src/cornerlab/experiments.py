"""epsilon-sweeps and rate fits for the pseudo-corner family."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fem, meshing, norms, singular
from .errors import EmptyNullspace, EpsilonOutOfRange, NonPositiveValue, SOutOfWindow
from .geometry import DomainFamily
from .spectral import lambda_prime

_MESHES: dict = {}
_SOLVES: dict = {}


def clear_caches():
    _MESHES.clear()
    _SOLVES.clear()


def default_eps(eps0, count=5):
    """``eps0/8 * 2^-k`` for ``k = 0..count-1``."""
    return [eps0 / 8.0 * 2.0 ** -k for k in range(count)]


def thresholds(family: DomainFamily):
    """``(s_Omega, s_P)`` with ``s_P`` from the largest small-corner opening."""
    s_omega = 1.0 + math.pi / family.sector.omega
    s_p = 1.0 + math.pi / family.pattern.max_opening
    return s_omega, s_p


def check_window(family, s):
    lo, hi = thresholds(family)
    if not lo < s < hi:
        raise SOutOfWindow(f"s = {s:g} is outside the window ({lo:.6g}, {hi:.6g})")


# ---------------------------------------------------------------- solves
def family_mesh(family, eps, budget=None):
    key = (id(family), float(eps), budget)
    if key not in _MESHES:
        _MESHES[key] = meshing.family_mesh(family, eps, budget)
    return _MESHES[key]


def solve(family, eps, rhs, budget=None, order=2):
    """Cached solve of ``Delta u = rhs`` on ``Omega_eps``."""
    key = (id(family), float(eps), rhs, budget, order)
    if key not in _SOLVES:
        mesh = family_mesh(family, eps, budget)
        _SOLVES[key] = fem.solve_dirichlet(mesh, rhs, order, r0=family.sector.r0)
    return _SOLVES[key]


def c1_limit(family, rhs, budget=None, order=2):
    """``c_1(u_0)`` from the solve on the unperturbed domain."""
    u0 = solve(family, 0.0, rhs, budget, order)
    return singular.extract_coefficient(u0, family.sector, 1).value


# ---------------------------------------------------------------- fits
@dataclass
class RateFit:
    slope: float
    intercept: float
    r2: float
    predicted: float
    deviation: float
    n: int = 0


def fit_rate(eps, values, predicted=float("nan")) -> RateFit:
    """Least-squares line through ``(log eps, log value)``."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(eps) != len(values):
        raise ValueError("eps and values differ in length")
    if len(values) < 4:
        raise ValueError("a rate fit needs at least 4 points")
    if np.any(values <= 0) or np.any(eps <= 0):
        raise NonPositiveValue("rate fits need positive eps and values")
    x, y = np.log(eps), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss <= 1e-28 * max(1.0, float(np.sum(y * y))) else 1.0 - float(np.sum(resid ** 2)) / ss
    if ss <= 1e-28 * max(1.0, float(np.sum(y * y))):
        slope = 0.0
        intercept = float(y.mean())
    return RateFit(float(slope), float(intercept), float(r2), float(predicted),
                   float(abs(slope - predicted)), len(values))


# ---------------------------------------------------------------- sweeps
@dataclass
class SweepConfig:
    family: DomainFamily
    rhs: object = None
    eps: list = None
    norms: list = field(default_factory=lambda: [(1.75, 2.0)])
    budget: meshing.MeshBudget | None = None
    order: int = 2
    out: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.rhs is None:
            self.rhs = fem.AnalyticDeltaPhiH1(self.family.sector)
        if self.eps is None:
            self.eps = default_eps(self.family.eps0)
        for e in self.eps:
            if not 0 <= e < self.family.eps0 / 4:
                raise EpsilonOutOfRange(f"sweep eps = {e:g} must lie in [0, eps0/4)")
        for s, p in self.norms:
            guard = 1.5 if self.order == 1 else 2.5
            if s >= guard:
                raise norms.DivergentRequest(f"s = {s:g} not available for P{self.order} fields")


@dataclass
class SweepTable:
    eps: list
    columns: dict
    fits: dict = field(default_factory=dict)


def _layer_norms(family, eps, rhs, budget, order, requests, eps_ref):
    u = solve(family, eps, rhs, budget, order)
    if eps > 0:
        region = "layer"
    else:
        region = ("disk", family.sector.vertex, family.pattern.R0_prime * eps_ref)
    return [norms.fractional_norm(u, s, p, region) for s, p in requests]


def blowup_sweep(config: SweepConfig) -> SweepTable:
    """Seminorms of ``u_eps`` on the corner layer for each eps and (s, p).

    An ``eps = 0`` row is evaluated on ``Gamma ∩ B(1.5 R0 eps_ref)`` with the
    smallest positive eps of the sweep as reference.
    """
    positive = [e for e in config.eps if e > 0]
    eps_ref = min(positive) if positive else config.family.eps0 / 8
    args = [(config.family, e, config.rhs, config.budget, config.order, list(config.norms), eps_ref)
            for e in config.eps]
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            rows = list(pool.map(_layer_norms, *zip(*args)))
    else:
        rows = [_layer_norms(*a) for a in args]
    cols = {sp: [r[i] for r in rows] for i, sp in enumerate(config.norms)}
    table = SweepTable(list(config.eps), cols)
    lam = math.pi / config.family.sector.omega
    for (s, p), vals in cols.items():
        pe = [(e, v) for e, v in zip(config.eps, vals) if e > 0]
        if len(pe) >= 4:
            table.fits[(s, p)] = fit_rate(*zip(*pe), predicted=lam + 2.0 / p - s)
    return table


def operator_ratio_sweep(family, s, eps=None, budget=None, order=2, jobs=1):
    """``||u_eps||_{H^s(eps Q)}`` for ``f = Delta(phi h_1)`` fitted against ``s_Omega - s``.

    The data norm in the denominator does not depend on eps (the data lives
    where ``Omega_eps = Omega``), so only the numerator is swept.
    """
    check_window(family, s)
    cfg = SweepConfig(family, None, eps, [(s, 2.0)], budget, order, jobs=jobs)
    table = blowup_sweep(cfg)
    s_omega, _ = thresholds(family)
    table.fits[(s, 2.0)] = fit_rate(table.eps, table.columns[(s, 2.0)], s_omega - s)
    return table


def inner_leading_residual(family, rhs, eps, profile: singular.CanonicalProfile, c1=None,
                           budget=None, order=2):
    """``||u_eps - eps^lam c1 K(./eps)||_{H1(eps Q)} / ||u_eps||_{H1(eps Q)}``.

    The first triangles of both meshes are the (scaled) pattern mesh of Q,
    so the comparison is made element by element on identical local dofs.
    """
    if c1 is None:
        c1 = c1_limit(family, rhs, budget, order)
    u = solve(family, eps, rhs, budget, order)
    lam = math.pi / family.sector.omega
    layer = meshing.submesh(u.mesh, "layer")
    k_layer = meshing.submesh(profile.field.mesh, "layer")
    if layer.n_triangles != k_layer.n_triangles or profile.field.order != order:
        raise ValueError("profile and solution do not share the pattern mesh")
    ue = u.restrict(layer)
    kf = profile.field.restrict(k_layer)
    model = fem.FemField(layer, order, eps ** lam * c1 * kf.values, ue.dirichlet)
    diff = ue - model
    num = fem.energy(diff) + singular.l2_norm(diff) ** 2
    den = fem.energy(ue) + singular.l2_norm(ue) ** 2
    return math.sqrt(num / den)


def generic_rhs(family):
    """``Delta(phi (h_1 + h_2))``: data exciting the first two singular modes."""
    s = family.sector
    return fem.Combination(((1.0, fem.AnalyticDeltaPhiH1(s, 1)), (1.0, fem.AnalyticDeltaPhiH1(s, 2))))


def inner_sweep(family, rhs=None, eps=None, R_art=256.0, budget=None, order=2):
    """Leading-term residual over eps, fitted against the first exponent gap.

    The default data excites ``h_2`` as well; with ``c_2(u_0) = 0`` and a
    mirror symmetric family the gap term vanishes and the residual decays
    faster than the generic rate.
    """
    rhs = rhs or generic_rhs(family)
    eps = eps or default_eps(family.eps0)
    prof = singular.canonical_profile(family, 1, R_art, budget, order)
    c1 = c1_limit(family, rhs, budget, order)
    vals = [inner_leading_residual(family, rhs, e, prof, c1, budget, order) for e in eps]
    return SweepTable(list(eps), {"residual": vals}, {"residual": fit_rate(eps, vals, lambda_prime(family.sector.omega))})


def coefficient_sweep(family, rhs=None, eps=None, budget=None, order=2):
    """Small-corner coefficients ``d_{eps,l}`` fitted against ``pi/omega - pi/varpi``."""
    rhs = rhs or fem.AnalyticDeltaPhiH1(family.sector)
    eps = eps or default_eps(family.eps0)
    rows = []
    for e in eps:
        u = solve(family, e, rhs, budget, order)
        rows.append(singular.split_at_small_corners(u, family, e).d)
    d = np.array(rows)
    cols = {f"d{l + 1}": d[:, l].tolist() for l in range(d.shape[1])}
    predicted = math.pi / family.sector.omega - math.pi / family.pattern.max_opening
    table = SweepTable(list(eps), cols)
    table.fits["d1"] = fit_rate(eps, np.abs(d[:, 0]), predicted)
    return table


def symmetry_defect(table: SweepTable):
    """Max relative gap between ``|d_1|`` and ``|d_2|``."""
    d1 = np.abs(np.asarray(table.columns["d1"]))
    d2 = np.abs(np.asarray(table.columns["d2"]))
    return float(np.max(np.abs(d1 - d2) / np.maximum(d1, d2)))


# ---------------------------------------------------------------- H2 constraint
def bump_basis(family, count=4, mode=0):
    """``count`` radial bumps tiling the annulus ``r0/2 < r < r0``."""
    r0 = family.sector.r0
    w = 0.125 * r0
    centers = np.linspace(0.5 * r0 + w, r0 - w, count)
    return [fem.AnnulusBump(family.sector, float(c), w, mode=mode) for c in centers]


def gram_matrix(family, basis, budget=None, degree=6):
    """L2 inner products of the basis on the unperturbed domain."""
    mesh = family_mesh(family, 0.0, budget)
    bary, w = norms.triangle_rule(degree)
    pts = np.einsum("qk,tkd->tqd", bary, mesh.coords).reshape(-1, 2)
    vals = np.array([b(pts).reshape(mesh.n_triangles, len(w)) for b in basis])
    return np.einsum("q,t,atq,btq->ab", w, mesh.areas, vals, vals)


@dataclass
class ConstrainedResult:
    eps: float
    weights: np.ndarray
    c1: float
    f_norm: float
    ratio: float
    nullity: int
    d_matrix: np.ndarray


def constrained_h2_rhs(family, eps, basis=None, budget=None, order=2, rank_tol=1e-8):
    """Unit-norm combination of the basis with all ``d_{eps,l} = 0`` and largest ``c_1``."""
    basis = basis or bump_basis(family)
    L = len(family.pattern.corners)
    if len(basis) <= L:
        raise EmptyNullspace(f"need more than {L} basis functions, got {len(basis)}")
    D = np.array([singular.split_at_small_corners(solve(family, eps, b, budget, order),
                                                  family, eps).d for b in basis]).T
    _, sv, vt = np.linalg.svd(D)
    rank = int(np.sum(sv > rank_tol * max(sv.max(initial=0.0), 1e-300)))
    nullsp = vt[rank:].T
    if nullsp.shape[1] == 0:
        raise EmptyNullspace("the coefficient matrix has a trivial nullspace")
    G = gram_matrix(family, basis, budget)
    c = np.array([c1_limit(family, b, budget, order) for b in basis])
    a = nullsp @ np.linalg.solve(nullsp.T @ G @ nullsp, nullsp.T @ c)
    nrm = math.sqrt(float(a @ G @ a))
    if nrm == 0:
        a = nullsp[:, 0]
        nrm = math.sqrt(float(a @ G @ a))
    a = a / nrm
    if a @ c < 0:
        a = -a
    combo = fem.Combination(tuple((float(ak), b) for ak, b in zip(a, basis)))
    c1 = c1_limit(family, combo, budget, order)
    f_norm = math.sqrt(float(a @ G @ a))
    expo = 1.0 - math.pi / family.sector.omega
    return ConstrainedResult(eps, a, abs(c1), f_norm, abs(c1) / (eps ** expo * f_norm),
                             int(nullsp.shape[1]), D)


def constrained_sweep(family, eps=None, basis=None, budget=None, order=2):
    eps = eps or default_eps(family.eps0)
    res = [constrained_h2_rhs(family, e, basis, budget, order) for e in eps]
    vals = [r.c1 / r.f_norm for r in res]
    table = SweepTable(list(eps), {"c1_over_f": vals, "ratio": [r.ratio for r in res]})
    table.fits["c1_over_f"] = fit_rate(eps, vals, 1.0 - math.pi / family.sector.omega)
    return table, res


# ---------------------------------------------------------------- positivity
def random_nonpositive_rhs(family, rng, terms=2):
    """Sum of nonpositive annulus bumps supported in ``r0/2 < r < r0``."""
    r0 = family.sector.r0
    out = []
    for _ in range(terms):
        w = rng.uniform(0.05, 0.2) * r0
        c = rng.uniform(0.5 * r0 + w, r0)
        out.append((1.0, fem.AnnulusBump(family.sector, float(c), float(w),
                                         float(rng.uniform(0.5, 2.0)), -1,
                                         int(rng.integers(0, 2)))))
    return fem.Combination(tuple(out))


def positivity_check(family, seeds=(0, 1, 2), budget=None, order=2):
    """``c_1(u_0)`` for random nonpositive data; all values should be positive."""
    vals = []
    for seed in seeds:
        rhs = random_nonpositive_rhs(family, np.random.default_rng(seed))
        vals.append(c1_limit(family, rhs, budget, order))
    return vals
