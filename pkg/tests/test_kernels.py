import numpy as np
import pytest

from alhlab import _kernels_py as ref
from alhlab import kernels

ck = pytest.importorskip("alhlab._ckernels")


def batch(rng, M=5, N=4):
    A = rng.standard_normal((M, N, N))
    g = A @ np.swapaxes(A, -1, -2) + N * np.eye(N)
    return np.linalg.inv(g), rng.standard_normal((M, N, N, N)), rng.standard_normal((M,) + (N,) * 4)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_riemann_lower_parity(rng):
    ginv, gam, d2g = batch(rng)
    d2g = 0.5 * (d2g + np.einsum("mabij->mbaij", d2g))
    d2g = 0.5 * (d2g + np.einsum("mabij->mabji", d2g))
    np.testing.assert_allclose(ck.riemann_lower(ginv, gam, d2g), ref.riemann_lower(ginv, gam, d2g),
                               rtol=1e-12, atol=1e-12)


def test_b_tensor_parity(rng):
    ginv, _, R = batch(rng)
    np.testing.assert_allclose(ck.b_tensor(ginv, R), ref.b_tensor(ginv, R), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_pair_modulus_parity(rng, alpha):
    pts = rng.uniform(0, 1, (200, 2))
    vals = np.sin(3 * pts[:, 0]) + pts[:, 1] ** 0.5
    a = ck.pair_modulus(pts, vals, alpha, -10, 12)
    b = ref.pair_modulus(pts, vals, alpha, -10, 12)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-14)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-12)
    np.testing.assert_array_equal(a[2], b[2])
    assert a[2].sum() <= 200 * 199 // 2
