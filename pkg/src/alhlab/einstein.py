"""Laplacian identities for the curvature tensor and decay of covariant
derivatives of the Weyl tensor.

Covariant derivatives are taken on cubes of grid nodes: a tensor field is
differentiated with central stencils and corrected by Christoffel terms,
which shrinks the cube by one stencil half-width per derivative.  The rough
Laplacian is ``g^{ij} nabla_i nabla_j``.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass

import numpy as np

from . import kernels
from .curvature import _use_closed, christoffel_from_jet, metric_jet, riemann_from_jet
from .errors import ConfigurationError, DecayCertificationError, NotEinsteinError
from .fd import gradient, half_width, trim
from .fitting import DecayFit, fit_decay, running_max
from .grid import FermiGrid
from .tensors import check_metric, constant_curvature_tensor, ricci, tensor_gnorm, weyl

EINSTEIN_RTOL = 1e-6
MAX_DERIVATIVE_ORDER = 3
# norms below NOISE_RTOL |K|_g / h^j are roundoff of an identically zero tensor
NOISE_RTOL = 1e-12


@dataclass(frozen=True)
class IdentityResidual:
    """Both sides of a tensor identity and their difference, in g-norms.

    ``observed_convergence_order`` is only set by refinement studies
    (two or more spacings); single evaluations leave it ``None``.
    """

    lhs_norm: float
    rhs_norm: float
    residual_norm: float
    grid_spacing: float
    observed_convergence_order: float | None = None
    einstein_defect: float | None = None

    def __post_init__(self):
        if not self.residual_norm >= 0:
            raise ValueError("residual_norm must be nonnegative")


@dataclass(frozen=True)
class CurvatureBlock:
    """Metric, Christoffel symbols and curvature on a cube of nodes."""

    g: np.ndarray
    gamma: np.ndarray
    R: np.ndarray
    h: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[-1]

    @property
    def radius(self) -> int:
        return self.g.shape[0] // 2

    def center(self, T):
        return T[(self.radius,) * self.dim]


def curvature_block(grid: FermiGrid, node, radius: int, stencil_order: int = 4,
                    second_order: int = 2, method: str = "fd") -> CurvatureBlock:
    """Geometry on the cube of the given radius around ``node``.

    ``method="fd"`` uses the finite-difference jet (orders as in
    :func:`alhlab.curvature.metric_jet`); ``"closed"``/``"auto"`` use the
    warped-product formulas where available.
    """
    if _use_closed(grid, method):
        X = grid.block_coords(node, radius)
        shape = X.shape[:-1]
        flat = X.reshape(-1, grid.dim)
        g = grid.full_block(node, radius)
        check_metric(g)
        G = grid.metric.christoffel(flat).reshape(shape + (grid.dim,) * 3)
        R = grid.metric.riemann(flat).reshape(shape + (grid.dim,) * 4)
        return CurvatureBlock(g, G, R, grid.spacing)
    jet = metric_jet(grid, node, radius, stencil_order, second_order)
    check_metric(jet.g)
    return CurvatureBlock(jet.g, christoffel_from_jet(jet.g, jet.dg),
                          riemann_from_jet(jet.g, jet.dg, jet.d2g), grid.spacing)


def covariant_derivative(T, gamma, h, order: int = 2):
    """``(nabla T)_{i a1..ak}`` of an all-lower tensor field on a cube.

    Parameters
    ----------
    T : array, shape ``cube + (N,) * k``
    gamma : array, shape ``cube + (N, N, N)``, ``gamma[..., p, i, a] = Gamma^p_ia``
    h : per-axis spacings
    order : even stencil order

    Returns
    -------
    array of shape ``cube' + (N,) * (k + 1)`` on the cube shrunk by
    ``order // 2`` nodes per side; the derivative index comes first.
    """
    N = gamma.shape[-1]
    m = half_width(order)
    dT = gradient(T, h, order, m, N)
    Tt = trim(T, m, N)
    Gt = trim(gamma, m, N)
    k = T.ndim - N
    letters = string.ascii_letters[:k]
    out = dT
    for s in range(k):
        # sum_p Gamma^p_{i a_s} T_{a1..p..ak}
        src = letters[:s] + "P" + letters[s + 1:]
        dst = "I" + letters
        term = np.einsum(f"...PI{letters[s]},...{src}->...{dst}", Gt, Tt)
        out = out - term
    return out


def _second_covariant(T, blk: CurvatureBlock, order: int):
    """``nabla_i nabla_j T`` at the cube centre; needs a cube of radius ``2 * order // 2``."""
    w = half_width(order)
    N = blk.dim
    DT = covariant_derivative(T, blk.gamma, blk.h, order)
    DDT = covariant_derivative(DT, trim(blk.gamma, w, N), blk.h, order)
    return DDT[(0,) * N] if DDT.shape[0] == 1 else DDT[(DDT.shape[0] // 2,) * N]


def laplacian_riemann_terms(grid: FermiGrid, node, stencil_order: int = 4, second_order: int = 2,
                            derivative_order: int = 2, method: str = "fd"):
    """Left side ``Delta R`` and right side of the Laplacian-of-curvature identity.

    Returns ``(lhs, rhs, g)`` at ``node`` as all-lower arrays.
    """
    w = half_width(derivative_order)
    blk = curvature_block(grid, node, 2 * w, stencil_order, second_order, method)
    ginv_f = np.linalg.inv(blk.g)
    Ric = ricci(blk.R, ginv_f)
    DDR = _second_covariant(blk.R, blk, derivative_order)
    H = _second_covariant(Ric, blk, derivative_order)  # H[i, j, b, d] = nabla_i nabla_j Ric_bd

    g0 = blk.center(blk.g)
    ginv = np.linalg.inv(g0)
    R0 = blk.center(blk.R)
    Ric0 = blk.center(Ric)
    lhs = np.einsum("ij,ijabcd->abcd", ginv, DDR)
    rhs = laplacian_riemann_rhs(H, Ric0, R0, ginv)
    return lhs, rhs, g0


def laplacian_riemann_rhs(H, Ric, R, ginv):
    """Right side of the Laplacian-of-curvature identity from its ingredients.

    ``H[i, j, b, d] = nabla_i nabla_j Ric_bd``.
    """
    mixed = (-np.einsum("acbd->abcd", H) + np.einsum("bcad->abcd", H)
             + np.einsum("adbc->abcd", H) - np.einsum("bdac->abcd", H))
    RicUp = ginv @ Ric  # RicUp[j, a] = Ric^j_a
    quad = np.einsum("ja,jbcd->abcd", RicUp, R) - np.einsum("jb,jacd->abcd", RicUp, R)
    B = kernels.b_tensor(ginv[None], R[None])[0]
    bterm = 2.0 * (B - np.einsum("abdc->abcd", B) + np.einsum("acbd->abcd", B)
                   - np.einsum("adbc->abcd", B))
    return mixed + quad + bterm


def laplacian_riemann_residual(grid: FermiGrid, node, stencil_order: int = 4, second_order: int = 2,
                               derivative_order: int = 2, method: str = "fd") -> IdentityResidual:
    """Residual of the Laplacian-of-curvature identity at ``node``.

    The node needs ``derivative_order`` stencil layers for the two covariant
    derivatives plus the metric-jet layers.
    """
    lhs, rhs, g = laplacian_riemann_terms(grid, node, stencil_order, second_order,
                                          derivative_order, method)
    return IdentityResidual(
        lhs_norm=float(tensor_gnorm(lhs, g)),
        rhs_norm=float(tensor_gnorm(rhs, g)),
        residual_norm=float(tensor_gnorm(lhs - rhs, g)),
        grid_spacing=float(np.max(grid.spacing)),
    )


def required_half_width(stencil_order: int = 4, second_order: int = 2, derivative_order: int = 2,
                        layers: int = 2, method: str = "fd") -> int:
    """Patch half-width needed for ``layers`` covariant derivatives at the centre."""
    jet = 0 if method == "closed" else max(half_width(stencil_order), half_width(second_order))
    return layers * half_width(derivative_order) + jet


def convergence_order(spacings, residuals) -> float:
    """Mean log-ratio order over consecutive refinement levels."""
    spacings = np.asarray(spacings, dtype=float)
    residuals = np.asarray(residuals, dtype=float)
    if spacings.size < 2:
        raise ConfigurationError("convergence order needs at least two refinement levels")
    if np.any(residuals <= 0):
        return math.inf
    orders = np.log(residuals[:-1] / residuals[1:]) / np.log(spacings[:-1] / spacings[1:])
    return float(np.mean(orders))


def laplacian_riemann_convergence(metric, center, spacings=(0.02, 0.01, 0.005), stencil_order: int = 4,
                                  second_order: int = 2, derivative_order: int = 2):
    """Residuals at each spacing and the observed order.

    Returns ``(residuals, order)``; each entry is an :class:`IdentityResidual`
    and the last one carries the observed convergence order.
    """
    hw = required_half_width(stencil_order, second_order, derivative_order)
    out = []
    for h in spacings:
        grid = FermiGrid.patch(metric, center, h, hw)
        out.append(laplacian_riemann_residual(grid, grid.center_node(), stencil_order, second_order,
                                              derivative_order, method="fd"))
    order = convergence_order(spacings, [r.residual_norm for r in out])
    last = out[-1]
    out[-1] = IdentityResidual(last.lhs_norm, last.rhs_norm, last.residual_norm, last.grid_spacing, order)
    return out, order


# -- Einstein case ------------------------------------------------------------


def einstein_defect(R, g):
    """Pointwise ``|Ric + n g|_g`` with ``n + 1 = dim``."""
    N = g.shape[-1]
    ginv = np.linalg.inv(g)
    return tensor_gnorm(ricci(R, ginv) + (N - 1) * g, g)


def certify_einstein(blk: CurvatureBlock, rtol: float = EINSTEIN_RTOL) -> float:
    """Check ``Ric = -n g`` at every node of the block; return the max defect.

    Raises
    ------
    NotEinsteinError
        If the defect exceeds ``rtol * (1 + |R|_g)`` at the centre.
    """
    defect = float(np.max(einstein_defect(blk.R, blk.g)))
    tol = rtol * (1.0 + float(tensor_gnorm(blk.center(blk.R), blk.center(blk.g))))
    if defect >= tol:
        raise NotEinsteinError(defect, tol)
    return defect


def b_tilde(W, ginv):
    """``B~_abcd = W^i_a^j_b W_icjd``."""
    return kernels.b_tensor(ginv[None], W[None])[0]


def q_tilde(W, ginv):
    """``Q~_abcd = B~_abcd - B~_bacd + B~_acbd - B~_bcad``."""
    B = b_tilde(W, ginv)
    return (B - np.einsum("bacd->abcd", B) + np.einsum("acbd->abcd", B)
            - np.einsum("bcad->abcd", B))


def weyl_laplacian_terms(grid: FermiGrid, node, stencil_order: int = 4, second_order: int = 2,
                         derivative_order: int = 2, method: str = "auto", rtol: float = EINSTEIN_RTOL):
    """``(Delta W, -2n W + 2 Q~, g, defect)`` at ``node`` after Einstein certification."""
    w = half_width(derivative_order)
    blk = curvature_block(grid, node, 2 * w, stencil_order, second_order, method)
    defect = certify_einstein(blk, rtol)
    W = weyl(blk.R, blk.g)
    DDW = _second_covariant(W, blk, derivative_order)
    g0 = blk.center(blk.g)
    ginv = np.linalg.inv(g0)
    W0 = blk.center(W)
    n = blk.dim - 1
    lhs = np.einsum("ij,ijabcd->abcd", ginv, DDW)
    rhs = -2.0 * n * W0 + 2.0 * q_tilde(W0, ginv)
    return lhs, rhs, g0, defect


def weyl_laplacian_residual(grid: FermiGrid, node, stencil_order: int = 4, second_order: int = 2,
                            derivative_order: int = 2, method: str = "auto",
                            rtol: float = EINSTEIN_RTOL) -> IdentityResidual:
    """Residual of ``Delta W = -2n W + 2 Q~`` for a certified Einstein grid.

    Raises
    ------
    NotEinsteinError
        If ``|Ric + n g|_g`` exceeds ``rtol (1 + |R|_g)`` at any stencil node.
    """
    lhs, rhs, g, defect = weyl_laplacian_terms(grid, node, stencil_order, second_order,
                                               derivative_order, method, rtol)
    return IdentityResidual(
        lhs_norm=float(tensor_gnorm(lhs, g)),
        rhs_norm=float(tensor_gnorm(rhs, g)),
        residual_norm=float(tensor_gnorm(lhs - rhs, g)),
        grid_spacing=float(np.max(grid.spacing)),
        einstein_defect=defect,
    )


# -- decay of covariant derivatives -------------------------------------------


@dataclass(frozen=True)
class WeylDecayReport:
    """Norms ``|nabla^j T|_g`` along a ray and their fitted decay.

    ``norms[:, j]`` holds order ``j``; ``fits[j]`` is fitted to the running-max
    envelope of that column.  ``ah0_fit`` is the decay of ``|R + K|_g``.
    """

    r: np.ndarray
    norms: np.ndarray
    fits: tuple[DecayFit, ...]
    ah0_fit: DecayFit
    ah0_norms: np.ndarray
    tensor: str

    @property
    def exponents(self):
        return [f.exponent for f in self.fits]


def derivative_norms(grid: FermiGrid, node, max_order: int, tensor: str = "weyl",
                     derivative_order: int = 2, stencil_order: int = 4, second_order: int = 2,
                     method: str = "auto"):
    """``(|R + K|_g, [|nabla^j T|_g for j = 0..max_order])`` at ``node``.

    Values below the roundoff floor ``NOISE_RTOL |K|_g / h^j`` are returned as 0.
    """
    if tensor not in ("weyl", "riemann"):
        raise ConfigurationError("tensor must be 'weyl' or 'riemann'")
    if not 0 <= max_order <= MAX_DERIVATIVE_ORDER:
        raise ConfigurationError(f"max_order must lie in [0, {MAX_DERIVATIVE_ORDER}]")
    w = half_width(derivative_order)
    blk = curvature_block(grid, node, max_order * w, stencil_order, second_order, method)
    N = blk.dim
    K = constant_curvature_tensor(blk.g)
    T = weyl(blk.R, blk.g) if tensor == "weyl" else blk.R + K
    g0 = blk.center(blk.g)
    floor = NOISE_RTOL * float(tensor_gnorm(blk.center(K), g0))
    h = float(np.min(blk.h))

    def clean(v, j):
        return v if v > floor / h ** j else 0.0

    ah0 = clean(float(tensor_gnorm(blk.center(blk.R + K), g0)), 0)
    norms = [clean(float(tensor_gnorm(blk.center(T), g0)), 0)]
    G = blk.gamma
    for j in range(1, max_order + 1):
        T = covariant_derivative(T, G, blk.h, derivative_order)
        G = trim(G, w, N)
        c = T.shape[0] // 2
        norms.append(clean(float(tensor_gnorm(T[(c,) * N], g0)), j))
    return ah0, norms


def weyl_derivative_decay(metric, y, r_values, a: float, max_order: int = 2, tensor: str = "weyl",
                          h: float = 0.02, derivative_order: int = 2, method: str = "auto",
                          envelope: float = 0.5, window=None, ah0_tolerance: float = 0.15,
                          stencil_order: int = 4, second_order: int = 2) -> WeylDecayReport:
    """Fit the decay of ``|nabla^j W|_g`` (or ``|nabla^j (R + K)|_g``) along a ray.

    Parameters
    ----------
    metric : FermiMetric
    y : tangential coordinates of the ray
    r_values : increasing radii
    a : expected decay exponent of ``|R + K|_g``
    tensor : ``"weyl"`` or ``"riemann"``; the latter differentiates ``R + K``
        (equal to ``R`` after one derivative)
    envelope : running-max half-width applied before each fit; 0 disables it
    window : fit window; by default the radii at least ``envelope`` away
        from both ends, where the envelope is unbiased

    Raises
    ------
    DecayCertificationError
        If the fitted decay of ``|R + K|_g`` is slower than ``a - ah0_tolerance``.
    """
    r_values = np.asarray(r_values, dtype=float)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    hw = max_order * half_width(derivative_order)
    if method == "fd" or not metric.has_closed_form:
        hw += max(half_width(stencil_order), half_width(second_order))
    hw = max(hw, 1)  # a grid axis needs two nodes
    ah0 = np.empty(r_values.size)
    norms = np.empty((r_values.size, max_order + 1))
    for i, r in enumerate(r_values):
        grid = FermiGrid.patch(metric, np.concatenate([[r], y]), h, hw)
        ah0[i], norms[i] = derivative_norms(grid, grid.center_node(), max_order, tensor,
                                            derivative_order, stencil_order, second_order, method)

    if window is None:
        window = (r_values[0] + envelope, r_values[-1] - envelope)

    def fit(v):
        env = running_max(r_values, v, envelope) if envelope > 0 else v
        return fit_decay(r_values, env, window, allow_log_correction=False)

    ah0_fit = fit(ah0)
    if ah0_fit.exponent < a - ah0_tolerance:
        raise DecayCertificationError(
            f"|R + K| decays at rate {ah0_fit.exponent:.3f}, below required {a - ah0_tolerance:.3f}"
        )
    fits = tuple(fit(norms[:, j]) for j in range(max_order + 1))
    return WeylDecayReport(r_values, norms, fits, ah0_fit, ah0, tensor)
