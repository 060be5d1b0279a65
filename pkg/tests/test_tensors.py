import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alhlab.errors import DegenerateMetricError, DimensionError
from alhlab.tensors import (
    constant_curvature_tensor,
    inverse_metric,
    kulkarni_nomizu,
    random_curvature_tensor,
    ricci,
    symmetry_defects,
    tensor_gnorm,
    weyl,
)


def random_metric(N, rng):
    A = rng.standard_normal((N, N))
    return A @ A.T + N * np.eye(N)


def loop_norm_sq(T, g):
    """Brute-force contraction T_abcd T^abcd over explicit index loops."""
    gi = np.linalg.inv(g)
    N = g.shape[0]
    total = 0.0
    for a, b, c, d, p, q, s, t in itertools.product(range(N), repeat=8):
        total += T[a, b, c, d] * T[p, q, s, t] * gi[a, p] * gi[b, q] * gi[c, s] * gi[d, t]
    return total


def test_k_norm_identity_metric_dim4():
    K = constant_curvature_tensor(np.eye(4))
    assert tensor_gnorm(K, np.eye(4)) ** 2 == pytest.approx(24.0, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_k_norm_and_full_trace_any_metric(n, rng):
    N = n + 1
    g = random_metric(N, rng)
    K = constant_curvature_tensor(g)
    gi = np.linalg.inv(g)
    assert tensor_gnorm(K, g) ** 2 == pytest.approx(2 * n * (n + 1), rel=1e-12)
    assert np.einsum("ac,bd,abcd->", gi, gi, K) == pytest.approx(-n * (n + 1), rel=1e-12)


def test_k_surface_slice_single_component():
    g = np.diag([1.0, 2.5])
    K = constant_curvature_tensor(g)
    nz = np.argwhere(np.abs(K) > 0)
    # only the (0,1,1,0)-type entries survive, all equal to +-g00 g11
    assert {tuple(i) for i in nz} == {(0, 1, 1, 0), (1, 0, 0, 1), (0, 1, 0, 1), (1, 0, 1, 0)}
    assert abs(K[0, 1, 1, 0]) == pytest.approx(2.5)


def test_gnorm_matches_loop_oracle(rng):
    g = random_metric(3, rng)
    T = random_curvature_tensor(3, rng)
    assert tensor_gnorm(T, g) ** 2 == pytest.approx(loop_norm_sq(T, g), rel=1e-12)


def test_gnorm_zero_tensor():
    assert tensor_gnorm(np.zeros((4,) * 4), np.eye(4)) == 0.0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), N=st.sampled_from([3, 4, 5]))
def test_gnorm_invariant_under_orthogonal_relabeling(seed, N):
    rng = np.random.default_rng(seed)
    g = random_metric(N, rng)
    T = random_curvature_tensor(N, rng)
    Q, _ = np.linalg.qr(rng.standard_normal((N, N)))
    g2 = Q.T @ g @ Q
    T2 = np.einsum("ai,bj,ck,dl,abcd->ijkl", Q, Q, Q, Q, T)
    a, b = tensor_gnorm(T, g), tensor_gnorm(T2, g2)
    assert abs(a - b) <= 1e-12 * a


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), N=st.sampled_from([3, 4, 5, 6]))
def test_random_curvature_tensor_symmetries(seed, N):
    R = random_curvature_tensor(N, np.random.default_rng(seed))
    scale = np.abs(R).max()
    for v in symmetry_defects(R).values():
        assert v <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), N=st.sampled_from([3, 4, 5]))
def test_weyl_traceless_all_contractions(seed, N):
    rng = np.random.default_rng(seed)
    g = random_metric(N, rng)
    R = random_curvature_tensor(N, rng)
    W = weyl(R, g)
    gi = np.linalg.inv(g)
    scale = np.abs(R).max() * np.abs(gi).max()
    assert np.abs(np.einsum("ac,abcd->bd", gi, W)).max() <= 1e-12 * scale
    assert np.abs(np.einsum("bd,abcd->ac", gi, W)).max() <= 1e-12 * scale
    assert np.abs(np.einsum("ad,abcd->bc", gi, W)).max() <= 1e-12 * scale


@pytest.mark.parametrize("N", [3, 4, 5])
def test_weyl_of_constant_curvature_vanishes(N, rng):
    g = random_metric(N, rng)
    K = constant_curvature_tensor(g)
    assert np.abs(weyl(-K, g)).max() <= 1e-12 * np.abs(K).max()


def test_weyl_equals_r_plus_k_for_einstein(rng):
    # curvature of an Einstein metric: -K plus a Weyl-type (traceless) part
    N = 5
    g = random_metric(N, rng)
    K = constant_curvature_tensor(g)
    W0 = weyl(random_curvature_tensor(N, rng), g)
    R = W0 - K
    ric = ricci(R, inverse_metric(g))
    assert np.allclose(ric, -(N - 1) * g, atol=1e-10)
    assert np.allclose(weyl(R, g), R + K, atol=1e-10)


def test_weyl_rejects_dimension_two():
    with pytest.raises(DimensionError):
        weyl(np.zeros((2,) * 4), np.eye(2))


def test_degenerate_metric_rejected():
    with pytest.raises(DegenerateMetricError):
        constant_curvature_tensor(np.diag([1.0, 1e-12]))


def test_kulkarni_nomizu_is_curvature_type(rng):
    A = rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 4))
    T = kulkarni_nomizu(A + A.T, B + B.T)
    assert max(symmetry_defects(T).values()) < 1e-12
