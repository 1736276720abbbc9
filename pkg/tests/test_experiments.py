import math

import numpy as np
import pytest

from cornerlab import experiments as X
from cornerlab.errors import EpsilonOutOfRange, NonPositiveValue, SOutOfWindow


def test_exact_power_law():
    eps = X.default_eps(1.0)
    fit = X.fit_rate(eps, [3.0 * e ** 0.4 for e in eps], 0.4)
    assert fit.slope == pytest.approx(0.4, abs=1e-12) and fit.r2 == pytest.approx(1.0)
    assert fit.deviation < 1e-12


def test_constant_column():
    fit = X.fit_rate([0.1, 0.05, 0.025, 0.0125], [2.0] * 4, 0.0)
    assert fit.slope == 0 and fit.r2 == 1


def test_fit_guards():
    with pytest.raises(NonPositiveValue):
        X.fit_rate([0.1, 0.05, 0.025, 0.0125], [1.0, 0.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        X.fit_rate([0.1, 0.05, 0.025], [1.0, 1.0, 1.0])


def test_default_eps():
    assert X.default_eps(1.0) == [1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128]


def test_thresholds(fig2):
    s_omega, s_p = X.thresholds(fig2)
    assert s_omega == pytest.approx(5 / 3)
    assert s_p == pytest.approx(1.8)
    X.check_window(fig2, 1.75)
    with pytest.raises(SOutOfWindow):
        X.check_window(fig2, 1.2)


def test_sweep_config_guards(fig2):
    with pytest.raises(EpsilonOutOfRange):
        X.SweepConfig(fig2, eps=[0.3])
    with pytest.raises(X.norms.DivergentRequest):
        X.SweepConfig(fig2, norms=[(1.6, 2.0)], order=1)


def test_bump_basis_support(fig2):
    basis = X.bump_basis(fig2)
    assert len(basis) == 4
    assert min(b.support_radius() for b in basis) >= 0.5 * fig2.sector.r0 - 1e-12
