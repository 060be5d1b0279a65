import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alhlab.errors import DegenerateDataError, DomainError, FitWindowError
from alhlab.fitting import fit_decay, fit_power, running_max

R = np.arange(0.0, 35.0 + 1e-9, 0.1)
WINDOW = (5.0, 35.0)


@pytest.mark.parametrize("b", [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
def test_planted_exponent_exact(b):
    fit = fit_decay(R, 3.0 * np.exp(-b * R), WINDOW)
    assert abs(fit.exponent - b) <= 0.01
    assert not fit.log_correction
    assert fit.constant == pytest.approx(3.0, rel=1e-8)


@pytest.mark.parametrize("b", [0.25, 0.5, 1.0, 1.5, 2.0, 3.0])
def test_planted_exponent_with_noise(b):
    rng = np.random.default_rng(int(100 * b))
    v = np.exp(-b * R) * (1.0 + 0.01 * rng.standard_normal(R.size))
    assert abs(fit_decay(R, v, WINDOW).exponent - b) <= 0.05


def test_log_corrected_selected_at_least_95_percent():
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(100):
        v = (R + 1.0) * np.exp(-2.0 * R) * (1.0 + 0.01 * rng.standard_normal(R.size))
        fit = fit_decay(R, v, WINDOW)
        hits += fit.log_correction and abs(fit.exponent - 2.0) <= 0.05
    assert hits >= 95


def test_pure_exponential_not_log_corrected_at_least_95_percent():
    rng = np.random.default_rng(1)
    hits = sum(not fit_decay(R, np.exp(-1.5 * R) * (1.0 + 0.01 * rng.standard_normal(R.size)),
                             WINDOW).log_correction for _ in range(100))
    assert hits >= 95


def test_zero_data_gives_infinite_exponent():
    fit = fit_decay(R, np.zeros_like(R), WINDOW)
    assert math.isinf(fit.exponent) and fit.is_zero


def test_short_window_raises():
    with pytest.raises(FitWindowError):
        fit_decay(R, np.exp(-R), (5.0, 5.5))


def test_nonpositive_samples_raise():
    v = np.exp(-R)
    v[100] = -1.0
    with pytest.raises(DomainError):
        fit_decay(R, v, WINDOW)


def test_single_r_value_is_degenerate():
    with pytest.raises(DegenerateDataError):
        fit_decay(np.full(20, 2.0), np.ones(20))


def test_growth_is_negative_exponent():
    fit = fit_decay(R, np.exp(0.7 * R), WINDOW)
    assert fit.growth == pytest.approx(0.7, abs=1e-9)


def test_fit_power_recovers_polynomial_degree():
    r = np.linspace(1.0, 30.0, 200)
    assert fit_power(r, 2 * r ** 1.5) == pytest.approx(1.5, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(b=st.floats(0.1, 4.0), c=st.floats(1e-3, 1e3))
def test_fit_invariant_under_scaling(b, c):
    f1 = fit_decay(R, np.exp(-b * R), WINDOW, allow_log_correction=False)
    f2 = fit_decay(R, c * np.exp(-b * R), WINDOW, allow_log_correction=False)
    assert abs(f1.exponent - f2.exponent) <= 1e-9


def test_running_max_envelope():
    r = np.arange(0.0, 10.0, 0.1)
    v = np.abs(np.sin(3 * r)) * np.exp(-r)
    env = running_max(r, v, 0.5)
    assert np.all(env >= v)
    assert abs(fit_decay(r, env, (1.0, 9.0), allow_log_correction=False).exponent - 1.0) < 0.1
