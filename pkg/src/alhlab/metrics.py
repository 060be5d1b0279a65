"""Analytic metrics in Fermi form ``dr^2 + g_ab(y, r) dy^a dy^b``.

Coordinates are ordered ``x = (r, y^1, ..., y^n)``.  All evaluators are
vectorised over a batch of points ``X`` of shape ``(M, n + 1)``.

Warped products ``dr^2 + phi(r)^2 h(y)`` carry closed-form Christoffel
symbols and curvature, used as the fast path and as oracles for the
finite-difference route.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .tensors import constant_curvature_tensor

Func = Callable[[np.ndarray], np.ndarray]


def full_metric(gt):
    """Embed tangential blocks ``(..., n, n)`` as ``(..., n+1, n+1)`` with ``g_00 = 1``."""
    gt = np.asarray(gt, dtype=float)
    n = gt.shape[-1]
    g = np.zeros(gt.shape[:-2] + (n + 1, n + 1))
    g[..., 0, 0] = 1.0
    g[..., 1:, 1:] = gt
    return g


class FermiMetric:
    """Base class: subclasses implement ``tangential(r, Y)``."""

    n: int

    def tangential(self, r, Y):
        raise NotImplementedError

    def full(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return full_metric(self.tangential(X[:, 0], X[:, 1:]))

    @property
    def has_closed_form(self) -> bool:
        return False


@dataclass(frozen=True)
class FunctionMetric(FermiMetric):
    """General metric from a vectorised tangential-block function."""

    n: int
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = "function"

    def tangential(self, r, Y):
        return self.func(np.asarray(r, dtype=float), np.asarray(Y, dtype=float))


# ---------------------------------------------------------------------------
# base metrics for warped products


class BaseMetric:
    n: int

    def metric(self, Y):
        raise NotImplementedError

    def christoffel(self, Y):
        """``Gamma[m, a, b, c] = Gamma^a_bc``."""
        raise NotImplementedError

    def riemann(self, Y):
        raise NotImplementedError


class DiagonalBase(BaseMetric):
    """``h = diag(s_1^2, ..., s_n^2)`` with subclass-supplied scale factors."""

    def scales(self, Y):
        """Return ``s`` of shape (M, n) and ``ds[m, k, j] = d_j s_k``."""
        raise NotImplementedError

    def metric(self, Y):
        s, _ = self.scales(np.atleast_2d(Y))
        M = s.shape[0]
        h = np.zeros((M, self.n, self.n))
        idx = np.arange(self.n)
        h[:, idx, idx] = s ** 2
        return h

    def christoffel(self, Y):
        s, ds = self.scales(np.atleast_2d(Y))
        n = self.n
        G = np.zeros((s.shape[0], n, n, n))
        for a in range(n):
            for b in range(n):
                # Gamma^a_ab = Gamma^a_ba = d_b log s_a
                G[:, a, a, b] = ds[:, a, b] / s[:, a]
                G[:, a, b, a] = ds[:, a, b] / s[:, a]
        for a in range(n):
            for b in range(n):
                if a != b:
                    G[:, a, b, b] = -s[:, b] * ds[:, b, a] / s[:, a] ** 2
        return G


@dataclass(frozen=True)
class FlatBase(DiagonalBase):
    n: int

    def scales(self, Y):
        Y = np.atleast_2d(Y)
        return np.ones((Y.shape[0], self.n)), np.zeros((Y.shape[0], self.n, self.n))

    def riemann(self, Y):
        return np.zeros((np.atleast_2d(Y).shape[0],) + (self.n,) * 4)


@dataclass(frozen=True)
class SphereBase(DiagonalBase):
    """Round sphere of radius ``sqrt(c)`` in hyperspherical angles.

    ``h = c (dθ_1^2 + sin^2 θ_1 dθ_2^2 + ...)``; sectional curvature ``1/c``.
    """

    n: int
    c: float = 1.0

    def scales(self, Y):
        Y = np.atleast_2d(Y)
        M, n = Y.shape[0], self.n
        sin, cot = np.sin(Y), np.cos(Y) / np.sin(Y)
        s = np.ones((M, n))
        for k in range(1, n):
            s[:, k] = s[:, k - 1] * sin[:, k - 1]
        ds = np.zeros((M, n, n))
        for k in range(n):
            for j in range(k):
                ds[:, k, j] = s[:, k] * cot[:, j]
        root = np.sqrt(self.c)
        return root * s, root * ds

    def riemann(self, Y):
        return constant_curvature_tensor(self.metric(Y)) / self.c


@dataclass(frozen=True)
class ProductBase(BaseMetric):
    """Riemannian product of two base metrics, coordinates concatenated."""

    first: BaseMetric
    second: BaseMetric

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.first.n + self.second.n

    def _split(self, Y):
        Y = np.atleast_2d(Y)
        return Y[:, : self.first.n], Y[:, self.first.n:]

    def _blocks(self, A, B, rank):
        n1 = self.first.n
        M = A.shape[0]
        out = np.zeros((M,) + (self.n,) * rank)
        out[(slice(None),) + (slice(0, n1),) * rank] = A
        out[(slice(None),) + (slice(n1, None),) * rank] = B
        return out

    def metric(self, Y):
        Y1, Y2 = self._split(Y)
        return self._blocks(self.first.metric(Y1), self.second.metric(Y2), 2)

    def christoffel(self, Y):
        Y1, Y2 = self._split(Y)
        return self._blocks(self.first.christoffel(Y1), self.second.christoffel(Y2), 3)

    def riemann(self, Y):
        Y1, Y2 = self._split(Y)
        return self._blocks(self.first.riemann(Y1), self.second.riemann(Y2), 4)


# ---------------------------------------------------------------------------
# warped products


@dataclass(frozen=True)
class WarpedProduct(FermiMetric):
    """``g = dr^2 + phi(r)^2 h(y)`` with closed-form geometry."""

    base: BaseMetric
    phi: Func
    dphi: Func
    ddphi: Func
    label: str = "warped"

    @property
    def n(self) -> int:  # type: ignore[override]
        return self.base.n

    @property
    def has_closed_form(self) -> bool:
        return True

    def tangential(self, r, Y):
        r = np.asarray(r, dtype=float)
        return self.phi(r)[:, None, None] ** 2 * self.base.metric(Y)

    def christoffel(self, X):
        """``Gamma[m, k, i, j] = Gamma^k_ij`` at points ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r, Y = X[:, 0], X[:, 1:]
        n, N = self.n, self.n + 1
        f, df = self.phi(r), self.dphi(r)
        h = self.base.metric(Y)
        G = np.zeros((X.shape[0], N, N, N))
        G[:, 0, 1:, 1:] = -(f * df)[:, None, None] * h
        eye = np.eye(n)
        G[:, 1:, 0, 1:] = (df / f)[:, None, None] * eye
        G[:, 1:, 1:, 0] = (df / f)[:, None, None] * eye
        G[:, 1:, 1:, 1:] = self.base.christoffel(Y)
        return G

    def riemann(self, X):
        """All-lower ``R_abcd`` at points ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r, Y = X[:, 0], X[:, 1:]
        N = self.n + 1
        f, df, ddf = self.phi(r), self.dphi(r), self.ddphi(r)
        h = self.base.metric(Y)
        R = np.zeros((X.shape[0],) + (N,) * 4)
        Kh = (np.einsum("mad,mbc->mabcd", h, h) - np.einsum("mac,mbd->mabcd", h, h))
        R[:, 1:, 1:, 1:, 1:] = (f ** 2)[:, None, None, None, None] * self.base.riemann(Y) \
            - ((f * df) ** 2)[:, None, None, None, None] * Kh
        rad = -(f * ddf)[:, None, None] * h  # R_{0 a b 0}
        R[:, 0, 1:, 1:, 0] = rad
        R[:, 1:, 0, 0, 1:] = rad
        R[:, 1:, 0, 1:, 0] = -rad
        R[:, 0, 1:, 0, 1:] = -rad
        return R


def _const(value):
    return lambda r: np.full_like(np.asarray(r, dtype=float), value)


def flat_cylinder(n: int) -> WarpedProduct:
    """Euclidean cylinder ``dr^2 + delta``."""
    return WarpedProduct(FlatBase(n), _const(1.0), _const(0.0), _const(0.0), "flat-cylinder")


def horospherical(n: int) -> WarpedProduct:
    """Hyperbolic space in horospherical form ``dr^2 + e^{2r} delta``."""
    return WarpedProduct(FlatBase(n), np.exp, np.exp, np.exp, "horospherical")


def hyperbolic_comparison(n: int, R0: float = 1.0) -> WarpedProduct:
    """``dr^2 + sinh^2(r + R0)`` times the round sphere; curvature -1."""
    return WarpedProduct(
        SphereBase(n),
        lambda r: np.sinh(r + R0),
        lambda r: np.cosh(r + R0),
        lambda r: np.sinh(r + R0),
        "hyperbolic-comparison",
    )


def sinh_flat(n: int, R0: float = 1.0) -> WarpedProduct:
    """``dr^2 + sinh^2(r + R0) delta`` (not constant curvature)."""
    return WarpedProduct(
        FlatBase(n),
        lambda r: np.sinh(r + R0),
        lambda r: np.cosh(r + R0),
        lambda r: np.sinh(r + R0),
        "sinh-flat",
    )


def product_metric(n: int) -> WarpedProduct:
    """``dr^2 + h`` with ``h`` the round sphere: totally geodesic slices."""
    return WarpedProduct(SphereBase(n), _const(1.0), _const(0.0), _const(0.0), "product")


def einstein_sphere_product(R0: float = 1.0) -> WarpedProduct:
    """Einstein metric ``dr^2 + sinh^2(r + R0) h`` in dimension 5, ``Ric = -4 g``.

    ``h`` is the product of two round 2-spheres scaled so that ``Ric_h = 3 h``;
    the Weyl tensor is nonzero and ``|W|_g`` decays like ``e^{-2r}``.
    """
    s2 = SphereBase(2, 1.0 / 3.0)
    return WarpedProduct(
        ProductBase(s2, s2),
        lambda r: np.sinh(r + R0),
        lambda r: np.cosh(r + R0),
        lambda r: np.sinh(r + R0),
        "einstein-sphere-product",
    )


def oscillating_warped(n: int = 3, eps: float = 1.0, k: float = 1.0, delta: float = 0.5) -> WarpedProduct:
    """Non-Einstein warped product over a flat base.

    ``phi = e^r (1 + w)`` with ``w = C e^{-(1+2 delta) r} sin(k e^{delta r})``
    and ``C = -eps / (k delta)^2``.  Then ``|R + K|_g ~ e^{-r}`` while the
    radial derivative of the curvature only decays like ``e^{-(1-delta) r}``.
    """
    C = -eps / (k * delta) ** 2
    lam = 1.0 + 2.0 * delta

    def parts(r):
        r = np.asarray(r, dtype=float)
        ph = k * np.exp(delta * r)
        s, c = np.sin(ph), np.cos(ph)
        env = C * np.exp(-lam * r)
        w = env * s
        # d/dr (sin ph) = delta ph cos ph, d/dr(ph) = delta ph
        dw = env * (-lam * s + delta * ph * c)
        ddw = env * (lam ** 2 * s - 2 * lam * delta * ph * c
                     + delta ** 2 * ph * c - (delta * ph) ** 2 * s)
        return w, dw, ddw

    def phi(r):
        w, _, _ = parts(r)
        return np.exp(r) * (1.0 + w)

    def dphi(r):
        w, dw, _ = parts(r)
        return np.exp(r) * (1.0 + w + dw)

    def ddphi(r):
        w, dw, ddw = parts(r)
        return np.exp(r) * (1.0 + w + 2 * dw + ddw)

    return WarpedProduct(FlatBase(n), phi, dphi, ddphi, "oscillating-warped")


def decaying_warped(n: int, a: float, eps: float = 1.0) -> WarpedProduct:
    """``phi = e^r + eps e^{(1-a) r}``: ``|R + K|_g ~ e^{-a r}`` over a flat base."""
    return WarpedProduct(
        FlatBase(n),
        lambda r: np.exp(r) + eps * np.exp((1 - a) * r),
        lambda r: np.exp(r) + eps * (1 - a) * np.exp((1 - a) * r),
        lambda r: np.exp(r) + eps * (1 - a) ** 2 * np.exp((1 - a) * r),
        "decaying-warped",
    )


def perturbed_sinh(n: int, eps: float = 0.01, R0: float = 1.0) -> FunctionMetric:
    """``dr^2 + (sinh^2(r + R0) + eps sin(y^1) sin r) delta``."""

    def func(r, Y):
        f = np.sinh(r + R0) ** 2 + eps * np.sin(Y[:, 0]) * np.sin(r)
        return f[:, None, None] * np.eye(n)

    return FunctionMetric(n, func, "perturbed-sinh")


def random_analytic(n: int, seed: int, eps: float = 0.05, modes: int = 3, R0: float = 1.0) -> FunctionMetric:
    """``sinh^2(r + R0) (delta + eps P(x))`` with ``P`` a random symmetric trigonometric field."""
    rng = np.random.default_rng(seed)
    N = n + 1
    amps = []
    for _ in range(modes):
        A = rng.standard_normal((n, n))
        amps.append((0.5 * (A + A.T), rng.uniform(0.5, 1.5, N), rng.uniform(0, 2 * np.pi)))

    def func(r, Y):
        X = np.column_stack([r, Y])
        P = np.zeros((X.shape[0], n, n))
        for A, k, ph in amps:
            P += np.sin(X @ k + ph)[:, None, None] * A
        return (np.sinh(r + R0) ** 2)[:, None, None] * (np.eye(n) + eps * P)

    return FunctionMetric(n, func, f"random-analytic-{seed}")
