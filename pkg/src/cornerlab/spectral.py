"""Singular exponents and model singular functions of plane sectors."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveMu, PointOutsideSector
from .geometry import SectorSpec

EXP_TOL = 1e-12


@dataclass(frozen=True)
class SingularExponent:
    j: int
    mu: float
    lam_plus: float
    lam_minus: float
    polynomial: bool


def lambda_from_mu(n, mu):
    """Roots of ``lam**2 + (n-2)*lam - mu = 0`` as ``(lam_plus, lam_minus)``."""
    if mu <= 0:
        raise NonPositiveMu(f"eigenvalue mu={mu} must be positive")
    if n < 2:
        raise ValueError("space dimension must be at least 2")
    a = 1.0 - 0.5 * n
    root = math.sqrt(a * a + mu)
    return a + root, a - root


def exponents_sector(omega, J):
    """Exponents ``j*pi/omega`` of the Dirichlet Laplacian in a sector."""
    out = []
    for j in range(1, J + 1):
        lam = j * math.pi / omega
        poly = abs(lam - round(lam)) < EXP_TOL and round(lam) > 0
        out.append(SingularExponent(j, lam * lam, lam, -lam, bool(poly)))
    return out


def lambda_prime(omega):
    e1, e2 = exponents_sector(omega, 2)
    return min(e1.lam_plus, e2.lam_plus - e1.lam_plus)


def wmp_membership(exp: SingularExponent, m, p, n=2):
    """Whether the cut-off singular function lies in ``W^{m,p}``."""
    return exp.lam_plus > m - n / p or exp.polynomial


def sector_generators(omega, cutoff):
    """Generating exponents ``{lam_j^+} ∪ {-lam_j^-}`` below ``cutoff``."""
    gens = []
    j = 1
    while j * math.pi / omega <= cutoff + EXP_TOL:
        e = exponents_sector(omega, j)[-1]
        gens.extend([e.lam_plus, -e.lam_minus])
        j += 1
    return gens


def exponent_monoid(generators, cutoff):
    """All finite sums of ``generators`` up to ``cutoff``, plus 0, sorted."""
    gens = sorted({g for g in generators if 0 < g <= cutoff + EXP_TOL})
    found = [0.0]
    frontier = [0.0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x + g
                if y > cutoff + EXP_TOL:
                    break
                if all(abs(y - z) > EXP_TOL for z in found):
                    found.append(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(found)


def angular(omega, j, theta):
    """Unit-norm Dirichlet eigenfunction ``sqrt(2/omega) sin(j pi theta/omega)``."""
    return math.sqrt(2.0 / omega) * np.sin(j * math.pi * np.asarray(theta) / omega)


class SingularFunction:
    """``h_j^+ = r^lam psi_j(theta)`` in a sector frame, with derivatives.

    With ``extend=True`` the formula is evaluated also outside the sector
    (used for finite-difference stencils that straddle an edge).
    """

    def __init__(self, exp: SingularExponent, frame: SectorSpec, extend=False, sign=1):
        self.exp = exp
        self.frame = frame
        self.extend = extend
        self.k = exp.j * math.pi / frame.omega
        self.lam = exp.lam_plus if sign > 0 else exp.lam_minus
        self.c = math.sqrt(2.0 / frame.omega)

    def _polar(self, xy):
        r, th = self.frame.polar(xy)
        if not self.extend:
            tol = 1e-12
            bad = (th < -tol) | (th > self.frame.omega + tol)
            if np.any(bad & (r > 0)):
                raise PointOutsideSector("point outside the sector")
        return r, th

    def __call__(self, xy):
        r, th = self._polar(xy)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.c * r ** self.lam * np.sin(self.k * th)
        return np.where(r > 0, val, 0.0)

    def grad(self, xy):
        r, th = self._polar(xy)
        lam, k, c = self.lam, self.k, self.c
        with np.errstate(divide="ignore", invalid="ignore"):
            dr = c * lam * r ** (lam - 1) * np.sin(k * th)
            dt = c * k * r ** (lam - 1) * np.cos(k * th)
        a = self.frame.start_angle + th
        gx = dr * np.cos(a) - dt * np.sin(a)
        gy = dr * np.sin(a) + dt * np.cos(a)
        return np.column_stack([gx, gy])

    def hessian(self, xy):
        """Second derivatives; harmonic, so ``h_xx = -h_yy``."""
        r, th = self._polar(xy)
        lam, k, c = self.lam, self.k, self.c
        a = self.frame.start_angle + th
        with np.errstate(divide="ignore", invalid="ignore"):
            frr = c * lam * (lam - 1) * r ** (lam - 2) * np.sin(k * th)
            fr_r = c * lam * r ** (lam - 2) * np.sin(k * th)  # f_r / r
            fth_th = -c * k * k * r ** (lam - 2) * np.sin(k * th)  # f_thth / r^2
            frt = c * k * (lam - 1) * r ** (lam - 2) * np.cos(k * th)  # d_r(f_th/r)
        # Cartesian second derivatives in polar form
        cs, sn = np.cos(a), np.sin(a)
        f_rr = frr
        f_tt = fr_r + fth_th          # (1/r) f_r + (1/r^2) f_thth
        f_rt = frt                    # d_r((1/r) f_th)
        hxx = cs * cs * f_rr + sn * sn * f_tt - 2 * cs * sn * f_rt
        hyy = sn * sn * f_rr + cs * cs * f_tt + 2 * cs * sn * f_rt
        hxy = cs * sn * (f_rr - f_tt) + (cs * cs - sn * sn) * f_rt
        return np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)


def h_plus(exp: SingularExponent, frame: SectorSpec, points, extend=False):
    return SingularFunction(exp, frame, extend)(points)
