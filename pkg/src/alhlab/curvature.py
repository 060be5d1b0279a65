"""Christoffel symbols, curvature and hypersurface equations on Fermi grids.

Finite-difference route: first derivatives of ``g`` with a central stencil
of ``stencil_order`` (default 4), second derivatives with ``second_order``
(default 2).  Grids built from a closed-form metric may use the exact
warped-product formulas instead (``method="closed"``, or ``"auto"``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, FitWindowError
from .fd import central_weights, diff1, gradient, half_width, hessian, trim
from .fitting import MIN_SAMPLES, fit_decay
from .grid import FermiGrid
from .tensors import (
    CurvatureTensor4,
    ShapeOperator,
    check_metric,
    constant_curvature_tensor as _ktensor,
    tensor_gnorm,
)

METHODS = ("auto", "fd", "closed")


@dataclass(frozen=True)
class MetricJet:
    """Metric and its first two coordinate derivatives on a block of nodes.

    Arrays carry the block's spatial axes first; ``dg[..., a, i, j] = d_a g_ij``
    and ``d2g[..., a, b, i, j] = d_a d_b g_ij``.
    """

    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[-1]


def metric_jet(grid: FermiGrid, node, radius: int = 0, stencil_order: int = 4,
               second_order: int = 2) -> MetricJet:
    """Finite-difference jet on the cube of the given radius around ``node``."""
    N = grid.dim
    m = max(half_width(stencil_order), half_width(second_order))
    B = grid.full_block(node, radius + m)
    h = grid.spacing
    return MetricJet(
        g=trim(B, m, N),
        dg=gradient(B, h, stencil_order, m, N),
        d2g=hessian(B, h, second_order, m, N),
    )


def christoffel_first_kind(dg):
    """``G[..., f, b, c] = (d_b g_fc + d_c g_fb - d_f g_bc) / 2``."""
    return 0.5 * (np.swapaxes(dg, -3, -2)
                  + np.einsum("...cfb->...fbc", dg)
                  - dg)


def _enforce_fermi(G):
    G[..., 0, 0, :] = 0.0
    G[..., 0, :, 0] = 0.0
    G[..., :, 0, 0] = 0.0
    return G


def christoffel_from_jet(g, dg):
    ginv = np.linalg.inv(g)
    G2 = np.einsum("...ef,...fbc->...ebc", ginv, christoffel_first_kind(dg))
    return _enforce_fermi(G2)


def riemann_from_jet(g, dg, d2g):
    """All-lower Riemann tensor from a metric jet (any batch shape)."""
    batch = g.shape[:-2]
    N = g.shape[-1]
    ginv = np.linalg.inv(g).reshape((-1, N, N))
    G1 = christoffel_first_kind(dg).reshape((-1, N, N, N))
    R = kernels.riemann_lower(ginv, G1, d2g.reshape((-1,) + (N,) * 4))
    return R.reshape(batch + (N,) * 4)


def _use_closed(grid: FermiGrid, method: str) -> bool:
    if method not in METHODS:
        raise ConfigurationError(f"method must be one of {METHODS}")
    if method == "closed" and not grid.closed_form:
        raise ConfigurationError("grid has no closed-form metric declared")
    return method == "closed" or (method == "auto" and grid.closed_form)


def christoffel(grid: FermiGrid, node, stencil_order: int = 4, method: str = "auto"):
    """``Gamma[k, i, j] = Gamma^k_ij`` at ``node``.

    The Fermi identities ``Gamma^0_00 = Gamma^a_00 = Gamma^0_0a = 0`` hold exactly.
    """
    if _use_closed(grid, method):
        grid._check_node(node, half_width(stencil_order))
        check_metric(grid.g_components[tuple(node)])
        return _enforce_fermi(grid.metric.christoffel(grid.coords(node)[None])[0])
    N = grid.dim
    m = half_width(stencil_order)
    B = grid.full_block(node, m)
    check_metric(B[..., 1:, 1:])
    g = trim(B, m, N)[(0,) * N]
    dg = gradient(B, grid.spacing, stencil_order, m, N)[(0,) * N]
    return christoffel_from_jet(g, dg)


def riemann(grid: FermiGrid, node, stencil_order: int = 4, second_order: int = 2,
            method: str = "auto") -> CurvatureTensor4:
    """Curvature tensor ``R_abcd`` at ``node``."""
    g = grid.g_components[tuple(node)]
    if _use_closed(grid, method):
        grid._check_node(node, max(half_width(stencil_order), half_width(second_order)))
        check_metric(g)
        return CurvatureTensor4(grid.metric.riemann(grid.coords(node)[None])[0], _full(g))
    jet = metric_jet(grid, node, 0, stencil_order, second_order)
    check_metric(jet.g)
    z = (0,) * grid.dim
    R = riemann_from_jet(jet.g[z], jet.dg[z], jet.d2g[z])
    return CurvatureTensor4(R, jet.g[z])


def _full(gt):
    n = gt.shape[-1]
    g = np.zeros((n + 1, n + 1))
    g[0, 0] = 1.0
    g[1:, 1:] = gt
    return g


def constant_curvature_tensor(grid: FermiGrid, node) -> CurvatureTensor4:
    """``K_abcd = g_ad g_bc - g_ac g_bd`` from the sampled metric (no differentiation)."""
    g = _full(grid.g_components[tuple(node)])
    return CurvatureTensor4(_ktensor(g), g)


def shape_operator(grid: FermiGrid, node, stencil_order: int = 4) -> ShapeOperator:
    """``S_ab = d_r g_ab / 2`` by a central stencil in ``r``, raised with ``g``."""
    m = half_width(stencil_order)
    B = grid.full_block(node, m)
    N = grid.dim
    dr = gradient(B, grid.spacing, stencil_order, m, N)[(0,) * N][0]
    g = trim(B, m, N)[(0,) * N]
    return ShapeOperator.from_metric_derivative(g[1:, 1:], dr[1:, 1:])


# ---------------------------------------------------------------------------
# Gauss and Codazzi equations


def gauss_codazzi_terms(grid: FermiGrid, node, stencil_order: int = 4, second_order: int = 2,
                        shape_order: int = 2):
    """Ingredients of both structure equations at ``node``.

    The ambient curvature ``R`` and the intrinsic slice curvature ``Rt``
    come from one finite-difference jet of ``g``.  The extrinsic side comes
    from the shape-operator route: ``S_ab = d_r g_ab / 2`` with an
    ``shape_order`` stencil in ``r``, and its slice covariant derivative
    ``DS[a, b, c] = (nabla_a S)_bc`` from a 4th-order tangential difference
    of that field.  The two routes agree up to discretisation error, so
    the defects converge to zero under refinement instead of vanishing
    identically.
    """
    N = grid.dim
    jet = metric_jet(grid, node, 0, stencil_order, second_order)
    check_metric(jet.g)
    z = (0,) * N
    g, dg, d2g = jet.g[z], jet.dg[z], jet.d2g[z]
    R = riemann_from_jet(g, dg, d2g)
    gt = g[1:, 1:]
    dgt = dg[1:, 1:, 1:]
    Rt = riemann_from_jet(gt, dgt, d2g[1:, 1:, 1:, 1:])

    tw = 2  # half-width of the 4th-order tangential stencil
    radius = tw + half_width(shape_order)
    B = grid.full_block(node, radius)
    Sfield = 0.5 * _diff_r(B, grid.spacing[0], shape_order, radius - tw, N)[..., 1:, 1:]
    S = Sfield[(tw,) * N]
    dS = np.stack([_line_diff(Sfield, ax, grid.spacing[ax], tw, N) for ax in range(1, N)])
    Gt = np.einsum("ef,fbc->ebc", np.linalg.inv(gt), christoffel_first_kind(dgt))
    DS = dS - np.einsum("eab,ec->abc", Gt, S) - np.einsum("eac,be->abc", Gt, S)
    return {"R": R, "Rt": Rt, "S": S, "DS": DS, "g": gt}


def _diff_r(B, h, order, margin, N):
    return diff1(B, 0, h, order, margin, N)


def _line_diff(F, axis, h, tw, N):
    """4th-order central derivative along ``axis`` at the centre of block ``F``."""
    w = central_weights(1, 2 * tw)
    out = 0.0
    for k, c in zip(range(-tw, tw + 1), w):
        idx = [tw] * N
        idx[axis] += k
        out = out + c * F[tuple(idx)]
    return out / h


def gauss_defect(terms):
    """``R_abcd - Rt_abcd + S_ad S_bc - S_ac S_bd`` on tangential indices."""
    S = terms["S"]
    return (terms["R"][1:, 1:, 1:, 1:] - terms["Rt"]
            + np.einsum("ad,bc->abcd", S, S) - np.einsum("ac,bd->abcd", S, S))


def codazzi_defect(terms):
    """``R_abc0 + nabla_a S_bc - nabla_b S_ac`` on tangential indices."""
    DS = terms["DS"]
    return terms["R"][1:, 1:, 1:, 0] + (DS - np.swapaxes(DS, 0, 1))


def gauss_codazzi_residual(grid: FermiGrid, node, stencil_order: int = 4, second_order: int = 2,
                           shape_order: int = 2):
    """g-norms of the Gauss and Codazzi defects at ``node``."""
    terms = gauss_codazzi_terms(grid, node, stencil_order, second_order, shape_order)
    g = terms["g"]
    return float(tensor_gnorm(gauss_defect(terms), g)), float(tensor_gnorm(codazzi_defect(terms), g))


# ---------------------------------------------------------------------------
# growth of Fermi components


@dataclass(frozen=True)
class ComponentGrowth:
    index: tuple
    measured: float
    predicted: float
    consistent: bool


@dataclass(frozen=True)
class ComponentGrowthReport:
    a: float
    components: tuple
    tolerance: float

    @property
    def consistent(self) -> bool:
        return all(c.consistent for c in self.components)

    def exponent(self, index) -> float:
        for c in self.components:
            if c.index == tuple(index):
                return c.measured
        raise KeyError(index)


def predicted_component_growth(index, a: float, upper=()) -> float:
    """Growth exponent of a Fermi component of a tensor with ``|T|_g = O(e^{-ar})``.

    Each lower tangential index contributes ``+1`` (``g_ab ~ e^{2r}``), each
    upper tangential index ``-1``, normal indices ``0``.
    """
    lower = sum(1 for s, i in enumerate(index) if i != 0 and s not in upper)
    up = sum(1 for s, i in enumerate(index) if i != 0 and s in upper)
    return lower - up - a


def component_growth_check(r, T_series, a: float, upper=(), window=(5.0, None),
                           tolerance: float = 0.1, rel_floor: float = 1e-8,
                           indices=None) -> ComponentGrowthReport:
    """Fit the growth exponent of every Fermi component of ``T`` along ``r``.

    Parameters
    ----------
    r : (M,) radii.
    T_series : (M, N, ..., N) components along the ray.
    a : decay rate of ``|T|_g``.
    upper : contravariant slots of ``T``.
    indices : optional iterable of component indices to check; by default
        every component whose size exceeds ``rel_floor`` times the largest
        component at the last sample is checked.

    Components identically below ``1e-300`` report ``-inf`` growth, which
    is consistent with any bound.
    """
    r = np.asarray(r, dtype=float)
    T = np.asarray(T_series, dtype=float)
    lo = window[0] if window[0] is not None else -np.inf
    hi = window[1] if window[1] is not None else np.inf
    inside = (r >= lo) & (r <= hi)
    if inside.sum() < MIN_SAMPLES:
        raise FitWindowError(f"fit window holds {int(inside.sum())} samples, need {MIN_SAMPLES}")
    rank = T.ndim - 1
    if indices is None:
        scale = np.abs(T[inside]).max(axis=0)
        top = scale.max()
        indices = [tuple(ix) for ix in np.argwhere(scale > rel_floor * top)] if top > 0 else []
        if not indices:
            indices = [(0,) * rank]
    out = []
    for ix in indices:
        ix = tuple(int(i) for i in ix)
        series = np.abs(T[(slice(None),) + ix])
        pred = predicted_component_growth(ix, a, upper)
        if np.all(series[inside] < 1e-300):
            out.append(ComponentGrowth(ix, -np.inf, pred, True))
            continue
        fit = fit_decay(r, np.maximum(series, 1e-300), window)
        out.append(ComponentGrowth(ix, fit.growth, pred, fit.growth <= pred + tolerance))
    return ComponentGrowthReport(a, tuple(out), tolerance)


def curvature_along_ray(metric, y, r_values, method: str = "closed", h: float = 1e-2,
                        stencil_order: int = 4, second_order: int = 2):
    """``R_abcd`` and ``g`` at ``(r, y)`` for each ``r``; closed form or FD patches."""
    y = np.asarray(y, dtype=float)
    r_values = np.asarray(r_values, dtype=float)
    X = np.column_stack([r_values, np.tile(y, (r_values.size, 1))])
    g = metric.full(X)
    if method == "closed":
        return metric.riemann(X), g
    w = max(half_width(stencil_order), half_width(second_order))
    Rs = []
    for x in X:
        grid = FermiGrid.patch(metric, x, h, w)
        Rs.append(riemann(grid, grid.center_node(), stencil_order, second_order, "fd").components)
    return np.array(Rs), g
