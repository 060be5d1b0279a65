import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alhlab import models as mod
from alhlab.errors import ConfigurationError, PreconditionError, UnsupportedCaseError
from alhlab.fitting import fit_decay


def params(a, b, c=1.0):
    return mod.ModelParams.first_model(a, c) if b == 0 else mod.ModelParams.second_model(a, c)


def test_u_form_coefficients_a_half():
    red = mod.reduce_to_second_order(params(0.5, 0))
    assert (red.u.c1, red.u.c2) == (-1.5, 0.0)
    assert red.u.roots == (0.0, 1.5)


@pytest.mark.parametrize("a", [0.3, 0.5, 1.0, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("b", [0, 1])
def test_v_roots_and_zero_constant_term(a, b):
    red = mod.reduce_to_second_order(params(a, b))
    assert red.v.roots == (-2.0, 0.0)
    assert red.u.c2 == 0.0 and red.v.c2 == 0.0


def test_degenerate_rate_has_repeated_root():
    red = mod.reduce_to_second_order(params(2.0, 0))
    assert red.u.repeated and red.u.roots == (0.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0.2, 3.5).filter(lambda x: abs(x - 2.0) > 1e-3) | st.just(2.0),
       b=st.sampled_from([0, 1]), c=st.floats(0.2, 2.0),
       u0=st.floats(0.1, 3.0), v0=st.floats(0.1, 3.0))
def test_reduction_residual_against_numerical_derivatives(a, b, c, u0, v0):
    # oracle: second derivatives from finite differences of the integrated solution
    p = params(a, b, c)
    h = 1e-3
    sol = mod.integrate_model_system(p, u0, v0, r_max=3.0, step=h, rtol=1e-12, atol=1e-14)
    red = mod.reduce_to_second_order(p)
    r = sol.r[1:-1]
    for form, y in ((red.u, sol.u), (red.v, sol.v)):
        dy = (y[2:] - y[:-2]) / (2 * h)
        d2y = (y[2:] - 2 * y[1:-1] + y[:-2]) / h ** 2
        assert form.residual(r, y[1:-1], dy, d2y).max() < 1e-4


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 3.0])
def test_reduction_residual_on_system_derivatives(a):
    assert mod.integrate_model_system(params(a, 1), 1.0, 1.0, r_max=20.0).reduction_residual() < 1e-6


@settings(max_examples=100, deadline=None)
@given(a=st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0]), b=st.sampled_from([0, 1]),
       c=st.floats(0.1, 3.0), u0=st.floats(1e-3, 10.0), v0=st.floats(1e-3, 10.0))
def test_positive_data_stays_positive(a, b, c, u0, v0):
    sol = mod.integrate_model_system(params(a, b, c), u0, v0, r_max=10.0, step=0.25)
    assert np.all(sol.u > 0) and np.all(sol.v > 0)


def test_nonpositive_initial_data_rejected():
    with pytest.raises(PreconditionError):
        mod.integrate_model_system(params(1.0, 0), 0.0, 1.0)


@pytest.mark.parametrize("a,b,which,expected", [
    (1.5, 0, "u", 1.5),
    (0.5, 0, "v", 0.5),
    (1.5, 1, "v", 0.5),
])
def test_measured_model_exponents(a, b, which, expected):
    sol = mod.integrate_model_system(params(a, b), 1.0, 1.0, r_max=35.0)
    y = sol.u if which == "u" else sol.v
    assert abs(fit_decay(sol.r, y, (5.0, 35.0)).growth - expected) <= 0.1


@pytest.mark.parametrize("a,b,which,exponent,power", [
    (1.0, 0, "v", 0.0, 1),
    (3.0, 0, "v", 0.0, 0),
    (2.0, 1, "u", 2.0, 0),
    (0.5, 0, "v", 0.5, 0),
    (0.5, 0, "u", 2.5, 0),
    (1.5, 1, "v", 0.5, 0),
    (2.0, 1, "v", 0.0, 1),
    (1.5, 1, "u", 2.5, 0),
])
def test_predict_rate_table(a, b, which, exponent, power):
    g = mod.predict_rate(params(a, b), which)
    assert g.exponent == pytest.approx(exponent) and g.r_power == power


def test_predict_rate_rejects_unknown_unknown():
    with pytest.raises(ConfigurationError):
        mod.predict_rate(params(1.0, 0), "w")


@pytest.mark.parametrize("kw", [dict(a=0.0, b=0, c=1.0, Omega=3.0), dict(a=1.0, b=2, c=1.0, Omega=3.0),
                                dict(a=1.0, b=0, c=0.0, Omega=3.0)])
def test_model_params_validation(kw):
    with pytest.raises(ConfigurationError):
        mod.ModelParams(**kw)


def test_growth_descriptor_text():
    assert mod.GrowthDescriptor(0.0, 0).describe() == "O(1)"
    assert mod.GrowthDescriptor(0.0, 1).describe() == "O(r)"
    assert mod.GrowthDescriptor(1.5, 1).describe() == "O(r e^(1.5 r))"


def test_exppoly_algebra():
    p = mod.ExpPoly(((2.0, 1.0, 1), (1.0, 0.0, 0)))
    r = np.linspace(0, 2, 7)
    np.testing.assert_allclose(p(r), 2 * r * np.exp(r) + 1)
    np.testing.assert_allclose(p.derivative()(r), 2 * np.exp(r) * (1 + r))
    assert (p - p).is_zero()
    assert p.dominant() == (1.0, 1)


def test_explicit_source_equation_growth():
    # y'' - y' = e^{-r}: solutions C1 + C2 e^r + e^{-r}/2
    eq = mod.AsymptoticEquation(-1.0, 0.0, 1.0, -1.0, mod.zero, mod.zero, mod.one)
    v = mod.verify_asymptotic_theorem(eq)
    assert v.passed and abs(v.measured_exponent - 1.0) <= 0.05


def test_damped_equation_bounded():
    eq = mod.AsymptoticEquation(2.0, 0.0, 1.0, -math.inf, mod.zero, mod.zero, mod.zero)
    v = mod.verify_asymptotic_theorem(eq)
    assert v.passed and v.predicted.describe() == "O(1)"


def test_repeated_root_constant_source_quadratic():
    # y'' + e^{-r} y' = 1 grows like r^2 / 2
    eq = mod.AsymptoticEquation(0.0, 0.0, 1.0, 0.0, mod.one, mod.zero, mod.one)
    v = mod.verify_asymptotic_theorem(eq)
    assert v.passed and v.predicted.r_power == 2
    assert v.quadratic_coefficient == pytest.approx(0.5, rel=0.1)


def test_complex_roots_unsupported():
    with pytest.raises(UnsupportedCaseError):
        mod.verify_asymptotic_theorem(mod.AsymptoticEquation(0.0, 1.0))


@pytest.mark.parametrize("c1,c2", [(-1.5, 0.0), (2.0, 0.0), (-1.0, -2.0), (0.5, 0.0)])
def test_wronskian_exponent_is_root_sum(c1, c2):
    w = mod.wronskian_growth(mod.AsymptoticEquation(c1, c2, 1.0))
    assert abs(w + c1) <= 0.05
