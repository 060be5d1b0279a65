import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alhlab.errors import ConfigurationError
from alhlab.fd import central_weights, diff1, diff2, gradient, hessian, trim


def test_second_order_weights():
    assert central_weights(1, 2) == pytest.approx((-0.5, 0.0, 0.5))
    assert central_weights(2, 2) == pytest.approx((1.0, -2.0, 1.0))


def test_fourth_order_first_derivative_weights():
    assert central_weights(1, 4) == pytest.approx((1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12))


@pytest.mark.parametrize("deriv,order", [(3, 2), (1, 3), (2, 0)])
def test_unsupported_stencils(deriv, order):
    with pytest.raises(ConfigurationError):
        central_weights(deriv, order)


@settings(max_examples=30, deadline=None)
@given(coef=st.lists(st.floats(-2, 2), min_size=5, max_size=5), order=st.sampled_from([4, 6]))
def test_polynomials_differentiated_exactly(coef, order):
    # stencils of order p are exact on polynomials of degree p
    h = 0.1
    x = np.arange(-6, 7) * h
    p = np.polynomial.Polynomial(coef[: order - 1])
    f = p(x)[:, None]
    m = order // 2
    d1 = diff1(f, 0, h, order, m, 1)[:, 0]
    d2 = diff2(f, 0, 0, h, h, order, m, 1)[:, 0]
    xi = trim(x, m, 1)
    assert np.allclose(d1, p.deriv(1)(xi), atol=1e-9)
    assert np.allclose(d2, p.deriv(2)(xi), atol=1e-8)


def test_gradient_and_hessian_of_quadratic_form():
    h = np.array([0.1, 0.2])
    x = np.arange(-3, 4) * h[0]
    y = np.arange(-3, 4) * h[1]
    X, Y = np.meshgrid(x, y, indexing="ij")
    f = 3 * X ** 2 + 2 * X * Y - Y ** 2
    G = gradient(f, h, 2, 1, 2)
    H = hessian(f, h, 2, 1, 2)
    Xi, Yi = trim(X, 1, 2), trim(Y, 1, 2)
    assert np.allclose(G[..., 0], 6 * Xi + 2 * Yi)
    assert np.allclose(G[..., 1], 2 * Xi - 2 * Yi)
    assert np.allclose(H[..., 0, 0], 6) and np.allclose(H[..., 0, 1], 2) and np.allclose(H[..., 1, 1], -2)
