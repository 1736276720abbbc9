import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cornerlab import cutoffs


def test_smoothstep_endpoints():
    s, ds, d2s = cutoffs.smoothstep(np.array([0.0, 1.0]))
    assert np.allclose(s, [0, 1]) and np.allclose(ds, 0) and np.allclose(d2s, 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.0))
def test_smoothstep_derivative(t):
    h = 1e-6
    s, ds, _ = cutoffs.smoothstep(np.array([t]))
    lo, hi = max(t - h, 0.0), min(t + h, 1.0)
    fd = (cutoffs.smoothstep(np.array([hi]))[0] - cutoffs.smoothstep(np.array([lo]))[0]) / (hi - lo)
    assert ds[0] == pytest.approx(fd[0], abs=1e-6)
    assert 0 <= s[0] <= 1


def test_phi_and_big_phi():
    r = np.array([0.1, 0.49, 1.01, 2.5])
    phi = cutoffs.phi(r, 1.0)[0]
    assert np.allclose(phi, [1, 1, 0, 0])
    big = cutoffs.big_phi(np.array([0.5, 0.99, 2.01, 9.0]), 1.0)[0]
    assert np.allclose(big, [0, 0, 1, 1])
