import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from radres.fitting import FitError, fit_exponential_rate, fit_power_law, upper_envelope


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-3.0, 3.0))
def test_power_law_recovers_exact_data(p, b):
    h = np.geomspace(0.01, 0.1, 8)
    res = fit_power_law(np.column_stack([h, np.exp(b) * h**-p]))
    assert_allclose(res.exponent, p, rtol=1e-10)
    assert_allclose(res.intercept, b, atol=1e-9)
    assert res.r_squared == pytest.approx(1.0)
    assert res.model == "power-law"


def test_exponential_rate_exact_and_noisy():
    h = np.geomspace(0.01, 0.1, 12)
    res = fit_exponential_rate(np.column_stack([h, 3.0 * np.exp(0.2 / h)]))
    assert_allclose((res.exponent, res.intercept), (0.2, np.log(3.0)), rtol=1e-10)
    rng = np.random.default_rng(0)
    noisy = 3.0 * np.exp(0.2 / h + rng.normal(0, 0.5, h.size))
    res = fit_exponential_rate(np.column_stack([h, noisy]))
    assert 0 <= res.r_squared < 1
    assert abs(res.exponent - 0.2) < 0.05


def test_fit_errors():
    with pytest.raises(FitError):
        fit_power_law([[0.1, 1.0], [0.05, 2.0]])
    with pytest.raises(FitError):
        fit_power_law([[0.1, 1.0], [0.05, -2.0], [0.02, 3.0], [0.01, 4.0]])
    with pytest.raises(FitError):
        fit_exponential_rate([[0.1, 1.0]] * 5)


def test_upper_envelope():
    pts = [[0.1, 1.0], [0.05, 5.0], [0.07, 2.0], [0.02, 3.0], [0.01, 9.0]]
    env = upper_envelope(pts)
    assert_allclose(env, [[0.1, 1.0], [0.07, 2.0], [0.05, 5.0], [0.01, 9.0]])
