"""Quadrature rules on the reference triangle and on intervals.

Triangle rules are returned in barycentric form: an ``(nq, 3)`` array of
barycentric coordinates and weights that sum to one, so the integral over a
triangle ``T`` is ``area(T) * sum(w * f(points))``.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Symmetric triangle rule exact for polynomials up to ``degree``."""
    if degree <= 1:
        bary = np.array([[1 / 3, 1 / 3, 1 / 3]])
        w = np.array([1.0])
    elif degree == 2:
        a, b = 1 / 6, 2 / 3
        bary = np.array([[b, a, a], [a, b, a], [a, a, b]])
        w = np.full(3, 1 / 3)
    elif degree <= 4:
        # Dunavant degree 4, 6 points
        a1, w1 = 0.445948490915965, 0.223381589678011
        a2, w2 = 0.091576213509771, 0.109951743655322
        bary = np.array([
            [1 - 2 * a1, a1, a1], [a1, 1 - 2 * a1, a1], [a1, a1, 1 - 2 * a1],
            [1 - 2 * a2, a2, a2], [a2, 1 - 2 * a2, a2], [a2, a2, 1 - 2 * a2],
        ])
        w = np.array([w1] * 3 + [w2] * 3)
    else:
        bary, w = collapsed_gauss((degree + 2) // 2)
    return bary, w


@lru_cache(maxsize=None)
def collapsed_gauss(n):
    """Duffy-collapsed tensor Gauss rule with ``n*n`` points.

    Exact for polynomials of degree ``2n - 2`` on the triangle; used where
    smooth non-polynomial integrands need near machine precision.
    """
    x, wx = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    wx = 0.5 * wx
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(wx, wx, indexing="ij")
    # (u, v) in unit square -> (s, t) in triangle s + t <= 1
    s = u
    t = v * (1.0 - u)
    w = (wu * wv * (1.0 - u)).ravel() * 2.0
    s, t = s.ravel(), t.ravel()
    bary = np.column_stack([1.0 - s - t, s, t])
    return bary, w


def composite_gauss(a, b, panels, points):
    """Composite Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(points)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights
