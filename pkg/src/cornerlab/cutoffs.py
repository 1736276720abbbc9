"""Smooth radial cutoffs built on the quintic smoothstep."""
import numpy as np


def smoothstep(t):
    """``S(t) = 6t^5 - 15t^4 + 10t^3`` clamped to [0, 1], with S' and S''."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    s = t ** 3 * (10 - 15 * t + 6 * t * t)
    ds = 30 * t * t * (1 - t) ** 2
    d2s = 60 * t * (1 - t) * (1 - 2 * t)
    return s, ds, d2s


def ramp(r, a, b, rising=True):
    """C^2 transition between radii ``a < b``; returns value, d/dr, d2/dr2.

    ``rising=True`` goes from 0 (r <= a) to 1 (r >= b), otherwise 1 to 0.
    """
    if not b > a:
        raise ValueError("ramp needs a < b")
    w = b - a
    s, ds, d2s = smoothstep((np.asarray(r, dtype=float) - a) / w)
    ds, d2s = ds / w, d2s / (w * w)
    if rising:
        return s, ds, d2s
    return 1.0 - s, -ds, -d2s


def phi(r, r0):
    """Corner cutoff: 1 on B(r0/2), 0 outside B(r0)."""
    return ramp(r, 0.5 * r0, r0, rising=False)


def big_phi(r, R0):
    """Cutoff at infinity: 0 on B(R0), 1 outside B(2 R0)."""
    return ramp(r, R0, 2 * R0, rising=True)
