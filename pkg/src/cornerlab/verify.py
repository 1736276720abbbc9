"""Fast analytic verification suite behind ``corner-lab verify``."""
from __future__ import annotations

import math

import numpy as np

from . import fem, meshing, norms, singular
from .geometry import SectorSpec


class SinSin:
    """``sin(pi x) sin(pi y)`` on the unit square."""

    def __call__(self, p):
        return np.sin(math.pi * p[:, 0]) * np.sin(math.pi * p[:, 1])

    def grad(self, p):
        x, y = math.pi * p[:, 0], math.pi * p[:, 1]
        return math.pi * np.column_stack([np.cos(x) * np.sin(y), np.sin(x) * np.cos(y)])

    def hessian(self, p):
        x, y = math.pi * p[:, 0], math.pi * p[:, 1]
        pi2 = math.pi ** 2
        hxx = -pi2 * np.sin(x) * np.sin(y)
        hxy = pi2 * np.cos(x) * np.cos(y)
        return np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hxx], -1)], -2)

    def laplacian(self, p):
        return -2 * math.pi ** 2 * self(p)


class BubbleQuartic:
    """``x(1-x) y(1-y)`` on the unit square."""

    def __call__(self, p):
        x, y = p[:, 0], p[:, 1]
        return x * (1 - x) * y * (1 - y)

    def grad(self, p):
        x, y = p[:, 0], p[:, 1]
        return np.column_stack([(1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)])

    def hessian(self, p):
        x, y = p[:, 0], p[:, 1]
        hxx = -2 * y * (1 - y)
        hyy = -2 * x * (1 - x)
        hxy = (1 - 2 * x) * (1 - 2 * y)
        return np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)


def manufactured_rates(ns=(4, 8, 16, 32, 64), order=1):
    """Observed H1 and L2 orders of the P1 solve for ``sin(pi x) sin(pi y)``."""
    u = SinSin()
    h, e1, e0 = [], [], []
    for n in ns:
        uh = fem.solve_dirichlet(meshing.rectangle_mesh(n), u.laplacian, order)
        h.append(1.0 / n)
        e1.append(fem.h1_error(uh, u.grad))
        e0.append(fem.l2_error(uh, u))
    s1 = np.polyfit(np.log(h), np.log(e1), 1)[0]
    s0 = np.polyfit(np.log(h), np.log(e0), 1)[0]
    return float(s1), float(s0)


def scaling_deviation(s, p, eps=1.0 / 16):
    """Relative violation of the eps-scaling law of a seminorm on a scaled mesh copy."""
    mesh = meshing.rectangle_mesh(6)
    vals = np.sin(2.0 * mesh.vertices[:, 0]) * np.exp(mesh.vertices[:, 1])
    field = fem.FemField(mesh, 1, vals, fem.space(mesh, 1).dirichlet)
    small = fem.FemField(meshing.scale(mesh, eps), 1, vals, field.dirichlet)
    a = norms.fractional_norm(field, s, p)
    b = norms.fractional_norm(small, s, p)
    return abs(b * eps ** (s - 2.0 / p) - a) / a


def run_suite():
    rows = []
    s1, s0 = manufactured_rates()
    rows.append(("P1 H1 order", s1, 0.15, abs(s1 - 1.0) <= 0.15))
    rows.append(("P1 L2 order", s0, 0.2, abs(s0 - 2.0) <= 0.2))
    frame = SectorSpec(1.5 * math.pi)
    u = singular.SingularSum(frame, {1: 3.0, 2: 2.0})
    for j, c in ((1, 3.0), (2, 2.0)):
        est = singular.extract_coefficient(u, frame, j)
        rows.append((f"c{j} of 3h1+2h2", abs(est.value - c), 1e-10, abs(est.value - c) <= 1e-10))
    r = singular.parseval_residual(u, frame, 2, 0.3)
    rows.append(("Parseval residual J=2", r, 1e-8, r <= 1e-8))
    for s, p in ((0.5, 2.0), (1.4, 2.0), (0.5, 3.0)):
        d = scaling_deviation(s, p)
        rows.append((f"scaling law s={s:g} p={p:g}", d, 1e-10, d <= 1e-10))
    sq = meshing.rectangle_mesh(8)
    for name, fn in (("sin sin", SinSin()), ("x(1-x)y(1-y)", BubbleQuartic())):
        r = norms.h2_identity_residual(fn, sq)
        rows.append((f"H2 identity {name}", r, 1e-10, r <= 1e-10))
    return rows
