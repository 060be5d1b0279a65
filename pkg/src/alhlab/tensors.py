"""Pointwise tensor algebra: contractions, Ricci decomposition, norms.

Conventions (index 0 is the normal direction ``r``):

* ``R^e_abc = d_a Gamma^e_bc - d_b Gamma^e_ac + Gamma^e_af Gamma^f_bc - Gamma^e_bf Gamma^f_ac``
* ``R_abcd = g_de R^e_abc`` so the sectional curvature is ``R(X, Z, Z, X)``
* ``Ric_bc = g^ad R_abcd``
* ``K_abcd = g_ad g_bc - g_ac g_bd``; hyperbolic space has ``R = -K``.

All functions broadcast over leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMetricError, DimensionError

DEGENERACY_RATIO = 1e-10


def check_metric(g) -> None:
    """Raise if any metric in the batch is not positive definite."""
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise DegenerateMetricError("metric has non-finite components")
    ev = np.linalg.eigvalsh(0.5 * (g + np.swapaxes(g, -1, -2)))
    lo, hi = ev[..., 0], ev[..., -1]
    bad = (lo <= DEGENERACY_RATIO * hi) | (hi <= 0)
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))[0]
        raise DegenerateMetricError(
            f"metric degenerate at batch index {tuple(idx)}: "
            f"eigenvalue ratio {float(np.atleast_1d(lo)[tuple(idx)] / np.atleast_1d(hi)[tuple(idx)]):.3e}"
        )


def inverse_metric(g, check: bool = True):
    if check:
        check_metric(g)
    return np.linalg.inv(g)


def constant_curvature_tensor(g):
    """``K_abcd = g_ad g_bc - g_ac g_bd`` assembled algebraically."""
    g = np.asarray(g, dtype=float)
    check_metric(g)
    return (np.einsum("...ad,...bc->...abcd", g, g)
            - np.einsum("...ac,...bd->...abcd", g, g))


def kulkarni_nomizu(h, g):
    """``(h o g)_abcd = h_ad g_bc + h_bc g_ad - h_ac g_bd - h_bd g_ac``."""
    return (np.einsum("...ad,...bc->...abcd", h, g)
            + np.einsum("...bc,...ad->...abcd", h, g)
            - np.einsum("...ac,...bd->...abcd", h, g)
            - np.einsum("...bd,...ac->...abcd", h, g))


def ricci(R, ginv):
    return np.einsum("...ad,...abcd->...bc", ginv, R)


def scalar_curvature(R, ginv):
    return np.einsum("...bc,...bc->...", ginv, ricci(R, ginv))


def weyl(R, g, ric=None):
    """Weyl tensor ``W = R - P o g`` with Schouten tensor ``P``.

    Raises
    ------
    DimensionError
        If the ambient dimension is below 3.
    """
    R = np.asarray(R, dtype=float)
    g = np.asarray(g, dtype=float)
    N = g.shape[-1]
    if N < 3:
        raise DimensionError(f"Weyl tensor undefined in dimension {N} < 3")
    ginv = inverse_metric(g)
    if ric is None:
        ric = ricci(R, ginv)
    sc = np.einsum("...bc,...bc->...", ginv, ric)
    schouten = (ric - (sc / (2.0 * (N - 1)))[..., None, None] * g) / (N - 2)
    return R - kulkarni_nomizu(schouten, g)


def raise_all(T, ginv, slots=None):
    """Raise the listed slots (default: all) of a covariant tensor."""
    T = np.asarray(T, dtype=float)
    bdim = ginv.ndim - 2
    rank = T.ndim - bdim
    for s in (range(rank) if slots is None else slots):
        T = _raise_slot(T, ginv, s, bdim)
    return T


def _raise_slot(T, ginv, s, bdim):
    Tm = np.moveaxis(T, bdim + s, -1)
    extra = Tm.ndim - bdim - 1
    G = ginv.reshape(ginv.shape[:bdim] + (1,) * extra + ginv.shape[bdim:])
    out = np.einsum("...ij,...j->...i", G, Tm)
    return np.moveaxis(out, -1, bdim + s)


def tensor_gnorm(T, g, upper=()):
    """Pointwise norm ``sqrt(T . T)`` with indices contracted through g.

    Parameters
    ----------
    T : array, shape ``batch + (N,) * rank``
    g : array, shape ``batch + (N, N)``
    upper : sequence of int
        Slots of ``T`` that are contravariant; these are contracted with
        ``g`` instead of ``g^{-1}``.
    """
    T = np.asarray(T, dtype=float)
    g = np.asarray(g, dtype=float)
    bdim = g.ndim - 2
    rank = T.ndim - bdim
    ginv = inverse_metric(g)
    U = T
    for s in range(rank):
        U = _raise_slot(U, g if s in upper else ginv, s, bdim)
    val = np.sum((T * U).reshape(T.shape[:bdim] + (-1,)), axis=-1)
    return np.sqrt(np.maximum(val, 0.0))


def symmetry_defects(R):
    """Max-abs defects of the algebraic curvature symmetries."""
    R = np.asarray(R, dtype=float)
    lead = tuple(range(R.ndim - 4))

    def t(perm):
        return np.transpose(R, lead + tuple(R.ndim - 4 + i for i in perm))

    anti_ab = np.abs(R + t((1, 0, 2, 3))).max()
    anti_cd = np.abs(R + t((0, 1, 3, 2))).max()
    pair = np.abs(R - t((2, 3, 0, 1))).max()
    # R_abcd + R_bcad + R_cabd
    bianchi = np.abs(R + t((1, 2, 0, 3)) + t((2, 0, 1, 3))).max()
    return {"antisym_ab": float(anti_ab), "antisym_cd": float(anti_cd),
            "pair": float(pair), "bianchi": float(bianchi)}


def random_curvature_tensor(N, rng, scale=1.0):
    """Random tensor with all algebraic curvature symmetries.

    Built as a sum of Kulkarni-Nomizu products of random symmetric forms,
    which span the space of algebraic curvature tensors.
    """
    R = np.zeros((N,) * 4)
    for _ in range(N + 2):
        A = rng.standard_normal((N, N))
        B = rng.standard_normal((N, N))
        R += kulkarni_nomizu(A + A.T, B + B.T)
    return scale * R / (N + 2)


@dataclass(frozen=True)
class CurvatureTensor4:
    """All-lower rank-4 curvature-type tensor at one node, with its metric."""

    components: np.ndarray
    g: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[-1]

    def norm(self) -> float:
        return float(tensor_gnorm(self.components, self.g))

    def ricci(self):
        return ricci(self.components, inverse_metric(self.g))

    def symmetry_defects(self):
        return symmetry_defects(self.components)

    def __add__(self, other):
        return CurvatureTensor4(self.components + _components(other), self.g)

    def __sub__(self, other):
        return CurvatureTensor4(self.components - _components(other), self.g)


def _components(T):
    return T.components if isinstance(T, CurvatureTensor4) else np.asarray(T)


@dataclass(frozen=True)
class ShapeOperator:
    """Mixed shape operator ``S^beta_alpha`` stored as ``S[beta, alpha]``."""

    mixed: np.ndarray
    g: np.ndarray

    @property
    def lowered(self):
        """``S_ab = g_bc S^c_a``."""
        return np.einsum("bc,ca->ab", self.g, self.mixed)

    def symmetry_defect(self) -> float:
        L = self.lowered
        return float(np.abs(L - L.T).max())

    @classmethod
    def from_metric_derivative(cls, g, dr_g):
        """``S_ab = dr g_ab / 2``, raised with ``g``."""
        dr_g = np.asarray(dr_g, dtype=float)
        S_low = 0.5 * (dr_g + dr_g.T) / 2.0
        return cls(np.linalg.solve(g, S_low), g)
