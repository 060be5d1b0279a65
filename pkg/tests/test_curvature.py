import math

import numpy as np
import pytest

from alhlab import curvature as cv
from alhlab import metrics as M
from alhlab.grid import FermiGrid
from alhlab.tensors import constant_curvature_tensor, symmetry_defects, tensor_gnorm

CLOSED = [
    ("horospherical", lambda: M.horospherical(3), [1.0, 0.2, 0.1, 0.3]),
    ("hyperbolic", lambda: M.hyperbolic_comparison(3), [1.0, 1.2, 0.7, 0.4]),
    ("sinh-flat", lambda: M.sinh_flat(2), [0.8, 0.1, 0.2]),
    ("einstein-product", lambda: M.einstein_sphere_product(), [1.0, 1.2, 0.7, 1.1, 0.5]),
]


@pytest.mark.parametrize("name,make,center", CLOSED, ids=[c[0] for c in CLOSED])
def test_fd_christoffel_and_riemann_match_closed_form(name, make, center):
    met = make()
    g = FermiGrid.patch(met, center, 1e-3, 2)
    node = g.center_node()
    G_fd = cv.christoffel(g, node, 4, method="fd")
    G_cl = cv.christoffel(g, node, method="closed")
    assert np.abs(G_fd - G_cl).max() <= 1e-6 * max(1.0, np.abs(G_cl).max())
    R_fd = cv.riemann(g, node, 4, 2, method="fd").components
    R_cl = cv.riemann(g, node, method="closed").components
    assert np.abs(R_fd - R_cl).max() <= 1e-4 * max(1.0, np.abs(R_cl).max())


@pytest.mark.parametrize("seed", [0, 1])
def test_fermi_christoffel_identities(seed):
    g = FermiGrid.patch(M.random_analytic(3, seed), [1.0, 0.3, 0.2, 0.1], 0.01, 2)
    G = cv.christoffel(g, g.center_node(), 4, method="fd")
    # Gamma^0_{0 i} = Gamma^i_{00} = 0 in Fermi coordinates
    assert np.abs(G[0, 0, :]).max() < 1e-12
    assert np.abs(G[:, 0, 0]).max() < 1e-12


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_riemann_symmetries_random_metric(seed):
    g = FermiGrid.patch(M.random_analytic(3, seed), [1.0, 0.3, 0.2, 0.1], 0.01, 2)
    R = cv.riemann(g, g.center_node(), 4, 2, method="fd").components
    scale = np.abs(R).max()
    for v in symmetry_defects(R).values():
        assert v <= 1e-10 * scale


def test_hyperbolic_equals_minus_k():
    g = FermiGrid.patch(M.hyperbolic_comparison(3), [1.0, 1.2, 0.7, 0.4], 0.01, 2)
    node = g.center_node()
    R = cv.riemann(g, node, method="closed")
    K = cv.constant_curvature_tensor(g, node)
    assert np.abs(R.components + K.components).max() <= 1e-12 * np.abs(K.components).max()


def test_horospherical_sectional_curvature_minus_one():
    g = FermiGrid.patch(M.horospherical(2), [0.7, 0.0, 0.0], 0.005, 2)
    node = g.center_node()
    R = cv.riemann(g, node, 4, 2, method="fd").components
    gm = g.full_block(node, 0)[0, 0, 0]
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        sec = R[i, j, j, i] / (gm[i, i] * gm[j, j] - gm[i, j] ** 2)
        assert sec == pytest.approx(-1.0, abs=1e-4)


def test_flat_cylinder_curvature_vanishes():
    g = FermiGrid.patch(M.flat_cylinder(3), [1.0, 0.1, 0.2, 0.3], 0.05, 2)
    R = cv.riemann(g, g.center_node(), method="fd").components
    assert np.abs(R).max() < 1e-12


def test_shape_operator_of_hyperbolic_is_coth():
    R0 = 1.0
    g = FermiGrid.patch(M.hyperbolic_comparison(2, R0), [1.5, 1.2, 0.7], 1e-3, 2)
    S = cv.shape_operator(g, g.center_node())
    np.testing.assert_allclose(S.mixed, np.eye(2) / math.tanh(1.5 + R0), atol=1e-9)


def test_gauss_codazzi_second_order_convergence():
    met = M.random_analytic(3, 1)
    c = [1.0, 0.3, 0.2, 0.1]
    res = []
    for h in (0.02, 0.01, 0.005):
        g = FermiGrid.patch(met, c, h, 4)
        res.append(cv.gauss_codazzi_residual(g, g.center_node()))
    for k in (0, 1):
        e = [x[k] for x in res]
        order = np.mean(np.log2(np.array(e[:-1]) / np.array(e[1:])))
        assert order >= 1.9


@pytest.mark.parametrize("a", [1.0, 2.0])
def test_component_growth_of_decaying_warped_product(a):
    met = M.decaying_warped(2, a)
    r = np.arange(0.0, 10.0 + 1e-9, 0.1)
    R, g = cv.curvature_along_ray(met, [0.3, 0.4], r)
    K = constant_curvature_tensor(g)
    rep = cv.component_growth_check(r, R + K, a, window=(4.0, 10.0))
    assert rep.consistent
    norms = np.array([tensor_gnorm(x, gg) for x, gg in zip(R + K, g)])
    assert norms[-1] < norms[50]


def test_predicted_component_growth():
    assert cv.predicted_component_growth((1, 2, 2, 1), 1.5) == pytest.approx(2.5)
    assert cv.predicted_component_growth((0, 1, 1, 0), 1.5) == pytest.approx(0.5)
    assert cv.predicted_component_growth((1, 2, 2, 1), 1.5, upper=(0,)) == pytest.approx(0.5)
