"""Conformal compactification ``gbar = e^{-2r} g`` in ``rho = e^{-r}`` and Hölder regularity.

The Hölder estimator bins all sample pairs by dyadic distance and reads the
exponent off the slope of ``log omega(d)`` against ``log d``, where
``omega`` is the per-bin maximum of ``|F(p) - F(q)|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ClassificationMismatch,
    ConfigurationError,
    DomainError,
    ResolutionError,
)
from .fitting import DecayFit
from .kernels import pair_modulus
from .riccati import FlowTrajectory

CLASS_CODES = ("C0,a", "C0,b-all", "C0,1", "C1,a-1", "C1,b-all")
MIN_RHO_LEVELS = 64
MIN_Y_NODES = 16
CLASS_TOLERANCE = 0.2
RATE_TOLERANCE = 0.1
STABLE_SLOPE = 0.005


# ---------------------------------------------------------------------------
# compactified samples


@dataclass(frozen=True)
class CompactifiedGrid:
    """``gbar`` on ``y_nodes x rho_nodes``; ``rho_nodes`` decrease from ``e^{-r_0}``.

    ``gbar_components[k, i]`` is the tangential block at node ``k`` and level
    ``i``; the full metric adds ``drho^2`` with no cross terms.
    """

    rho_nodes: np.ndarray
    y_nodes: np.ndarray
    gbar_components: np.ndarray
    trajectory: Optional[FlowTrajectory] = field(default=None, compare=False, repr=False)

    @property
    def r_nodes(self):
        return -np.log(self.rho_nodes)

    @property
    def n(self) -> int:
        return self.gbar_components.shape[-1]

    def full_components(self, node: int, index: int):
        """Full ``(n+1) x (n+1)`` metric in ``(rho, y)`` ordering."""
        n = self.n
        G = np.zeros((n + 1, n + 1))
        G[0, 0] = 1.0
        G[1:, 1:] = self.gbar_components[node, index]
        return G

    def boundary_value(self, node: int = 0):
        """Boundary extension: the sample at the smallest ``rho``."""
        return self.gbar_components[node, -1]


def compactify(trajectory: FlowTrajectory) -> CompactifiedGrid:
    """Change variables ``rho = e^{-r}``; ``gbar`` is the trajectory's rescaled metric."""
    rho = np.exp(-trajectory.r_samples)
    return CompactifiedGrid(rho, trajectory.y_nodes, trajectory.gbar_series, trajectory)


def gbar_normal_derivative(grid: CompactifiedGrid, node: int = 0, index=None):
    """``d_rho gbar_{ab} = 2 rho^{-1} (delta - S)^c_a gbar_{cb}`` at the given levels.

    ``index`` selects sample levels (default all).  The result is symmetric
    up to the integrator's self-adjointness defect.
    """
    if grid.trajectory is None:
        raise ConfigurationError("grid carries no shape operator")
    rho = grid.rho_nodes
    D = grid.trajectory.D_series[node]
    G = grid.gbar_components[node]
    if index is not None:
        rho, D, G = rho[index], D[index], G[index]
    if np.any(np.asarray(rho) <= 0):
        raise DomainError("the normal-derivative formula is singular at rho = 0")
    return -2.0 / np.asarray(rho)[..., None, None] * np.einsum("...ca,...cb->...ab", D, G)


def gbar_normal_derivative_fd(grid: CompactifiedGrid, node: int = 0):
    """Second-order three-point differences of ``gbar`` in ``rho`` at interior levels.

    Returns ``(indices, derivative)``; the ``rho`` grid may be non-uniform.
    """
    rho = grid.rho_nodes
    G = grid.gbar_components[node]
    h1 = rho[1:-1] - rho[2:]   # spacing toward smaller rho
    h2 = rho[:-2] - rho[1:-1]  # spacing toward larger rho
    w_lo = -h2 / (h1 * (h1 + h2))
    w_mid = (h2 - h1) / (h1 * h2)
    w_hi = h1 / (h2 * (h1 + h2))
    d = (w_lo[:, None, None] * G[2:] + w_mid[:, None, None] * G[1:-1]
         + w_hi[:, None, None] * G[:-2])
    return np.arange(1, rho.size - 1), d


def first_derivative_norm(grid: CompactifiedGrid, node: int = 0):
    """Frobenius norm of all first coordinate derivatives of ``gbar`` (tangential and normal)."""
    traj = grid.trajectory
    dn = gbar_normal_derivative(grid, node)
    total = np.sum(dn.reshape(dn.shape[0], -1) ** 2, axis=1)
    if traj.dgbar_series is not None:
        dt = traj.dgbar_series[node]
        total = total + np.sum(dt.reshape(dt.shape[0], -1) ** 2, axis=1)
    return np.sqrt(total)


# ---------------------------------------------------------------------------
# regularity classes


@dataclass(frozen=True)
class RegularityClass:
    """One entry of the regularity table: ``code`` plus its Hölder exponent.

    ``exponent`` is the parameter of ``C0,a`` / ``C1,a-1`` and is ``None``
    for the ``b-all`` classes and ``1.0`` for ``C0,1``.
    """

    code: str
    exponent: Optional[float] = None

    def __post_init__(self):
        if self.code not in CLASS_CODES:
            raise ConfigurationError(f"unknown regularity class {self.code!r}")
        if self.exponent is not None:
            object.__setattr__(self, "exponent", round(float(self.exponent), 9))

    @property
    def label(self) -> str:
        if self.code == "C0,a":
            return f"C0,{self.exponent:g}"
        if self.code == "C1,a-1":
            return f"C1,{self.exponent:g}"
        return self.code

    @property
    def order(self) -> int:
        return 1 if self.code.startswith("C1") else 0

    def __str__(self):
        return self.label


def theorem_class(a: float, second_order: bool = False) -> RegularityClass:
    """Table lookup of the compactified metric's regularity for decay rate ``a``.

    First-order data: ``a < 1`` gives ``C0,a``, ``a = 1`` gives
    ``C0,b-all`` and ``a > 1`` gives ``C0,1``.  Second-order data refines
    ``1 < a < 2`` to ``C1,a-1`` and ``a = 2`` to ``C1,b-all``; outside
    ``(1, 2]`` the first-order entry is returned.
    """
    if not a > 0:
        raise ConfigurationError("a must be positive")
    if second_order and 1 < a < 2:
        return RegularityClass("C1,a-1", a - 1.0)
    if second_order and a == 2:
        return RegularityClass("C1,b-all")
    if a < 1:
        return RegularityClass("C0,a", a)
    if a == 1:
        return RegularityClass("C0,b-all")
    return RegularityClass("C0,1", 1.0)


def _measured_first(fit: DecayFit):
    g = fit.growth
    if g > RATE_TOLERANCE:
        return RegularityClass("C0,a", 1.0 - g) if g < 1 else None
    if fit.log_correction:
        return RegularityClass("C0,b-all")
    return RegularityClass("C0,1", 1.0)


def _measured_second(fit: DecayFit):
    g = fit.growth
    if g > RATE_TOLERANCE:
        return RegularityClass("C1,a-1", 2.0 - g - 1.0) if g < 1 else None
    if fit.log_correction:
        return RegularityClass("C1,b-all")
    return None  # bounded second derivatives: beyond the table


def _consistent(measured: Optional[RegularityClass], expected: RegularityClass) -> bool:
    if measured is None or measured.code != expected.code:
        return False
    if expected.exponent is None:
        return True
    return abs(measured.exponent - expected.exponent) <= CLASS_TOLERANCE


def classify_regularity(fit_first: DecayFit, fit_second: Optional[DecayFit], a: float) -> RegularityClass:
    """Regularity class supported by measured derivative growth.

    ``fit_first`` describes ``|d gbar|`` and ``fit_second`` (optional)
    ``|d^2 gbar|`` as functions of ``r``: growth ``g`` corresponds to
    ``O(rho^{-g})``, and a selected log-corrected model to ``O(log rho)``.
    The measured class must agree with the table entry for ``a`` (exponent
    within 0.2) or :class:`ClassificationMismatch` is raised.  Second-order
    data are used only where the table has a second-order entry.
    """
    first = _measured_first(fit_first)
    expected_first = theorem_class(a, False)
    if not _consistent(first, expected_first):
        raise ClassificationMismatch(
            f"first-derivative growth {fit_first.growth:.3f} (log={fit_first.log_correction}) "
            f"does not match {expected_first} for a = {a}"
        )
    if fit_second is None or not (1 < a <= 2):
        return expected_first
    second = _measured_second(fit_second)
    expected = theorem_class(a, True)
    if not _consistent(second, expected):
        raise ClassificationMismatch(
            f"second-derivative growth {fit_second.growth:.3f} (log={fit_second.log_correction}) "
            f"does not match {expected} for a = {a}"
        )
    return expected


# ---------------------------------------------------------------------------
# Hölder exponent estimation


@dataclass(frozen=True)
class HolderReport:
    exponent_estimate: float
    constant_estimate: float
    pair_sample_count: int
    measured_class: RegularityClass
    predicted_class: Optional[RegularityClass]
    agreement_flag: Optional[bool]
    nested_exponents: tuple = ()
    lipschitz_log_slope: float = 0.0

    def to_record(self) -> str:
        """Flat ``key=value`` text, one entry per line."""
        items = [
            ("exponent_estimate", repr(float(self.exponent_estimate))),
            ("constant_estimate", repr(float(self.constant_estimate))),
            ("pair_sample_count", str(int(self.pair_sample_count))),
            ("measured_class", self.measured_class.code),
            ("measured_class_exponent", _opt(self.measured_class.exponent)),
            ("predicted_class", self.predicted_class.code if self.predicted_class else "none"),
            ("predicted_class_exponent",
             _opt(self.predicted_class.exponent) if self.predicted_class else "none"),
            ("agreement_flag", "none" if self.agreement_flag is None else str(self.agreement_flag).lower()),
            ("nested_exponents", ",".join(repr(float(x)) for x in self.nested_exponents)),
            ("lipschitz_log_slope", repr(float(self.lipschitz_log_slope))),
        ]
        return "\n".join(f"{k}={v}" for k, v in items) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "HolderReport":
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)

        def cls_of(code, ex):
            if code == "none":
                return None
            return RegularityClass(code, None if ex == "none" else float(ex))

        flag = kv["agreement_flag"]
        nested = tuple(float(x) for x in kv["nested_exponents"].split(",") if x)
        return cls(float(kv["exponent_estimate"]), float(kv["constant_estimate"]),
                   int(kv["pair_sample_count"]),
                   cls_of(kv["measured_class"], kv["measured_class_exponent"]),
                   cls_of(kv["predicted_class"], kv["predicted_class_exponent"]),
                   None if flag == "none" else flag == "true", nested,
                   float(kv["lipschitz_log_slope"]))


def _opt(x):
    return "none" if x is None else repr(float(x))


def default_candidates(step: float = 0.01):
    return np.round(np.arange(step, 1.0 + 0.5 * step, step), 10)


def _check_sampling(y_nodes, rho_nodes):
    rho = np.asarray(rho_nodes, dtype=float)
    if rho.ndim != 1 or rho.size < MIN_RHO_LEVELS:
        raise ResolutionError(f"need at least {MIN_RHO_LEVELS} rho levels, got {rho.size}")
    if np.any(rho <= 0):
        raise DomainError("rho levels must be positive")
    ratio = rho[1:] / rho[:-1]
    if np.any(np.abs(ratio - ratio[0]) > 1e-6 * abs(ratio[0])) or abs(ratio[0] - 1) < 1e-12:
        raise ResolutionError("rho levels must be geometrically spaced")
    if y_nodes.shape[0] < MIN_Y_NODES:
        raise ResolutionError(f"need at least {MIN_Y_NODES} y nodes, got {y_nodes.shape[0]}")
    return rho


def boundary_limit(F):
    """Limit at ``rho = 0`` of samples ``F[..., k]`` on geometric levels sorted by increasing ``rho``.

    Aitken extrapolation from the three smallest levels, which is exact for
    ``L + C rho^a``; falls back to the smallest-level value when the
    differences are not geometrically contracting.
    """
    F = np.asarray(F, dtype=float)
    f0, f1, f2 = F[..., 0], F[..., 1], F[..., 2]
    d1, d2 = f1 - f0, f2 - f1
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d1 / d2
        lim = f0 - d1 * d1 / (d2 - d1)
    scale = np.maximum(np.abs(F).max(axis=-1), 1e-300)
    ok = (np.abs(d2) > 1e3 * np.finfo(float).eps * scale) & (ratio > 0) & (ratio < 1) & np.isfinite(lim)
    return np.where(ok, lim, f0)


def _slope(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(coef[1])


def estimate_holder_exponent(F, y_nodes, rho_nodes, candidate_grid=None, *, a: Optional[float] = None,
                             max_points: int = 4096, seed: int = 0,
                             lipschitz_tolerance: float = 0.02) -> HolderReport:
    """Hölder exponent of samples ``F[i, k] = F(y_nodes[i], rho_nodes[k])``.

    Parameters
    ----------
    F : array_like, shape (Ny, Nrho)
        Samples; ``y_nodes`` is ``(Ny, n)`` (or ``(Ny,)`` for one tangential
        direction) and ``rho_nodes`` geometric.
    candidate_grid : array_like, optional
        Admissible exponents; the fitted slope is snapped down onto it.
    a : float, optional
        Decay rate whose first-order table class is used as the prediction.

    Notes
    -----
    The boundary values ``F(y, 0)`` are extrapolated from the smallest
    levels (:func:`boundary_limit`) and included as samples.  The modulus
    ``omega(d)`` is the largest sample difference over pairs with distance
    in ``[2^j, 2^{j+1})``.  Bins within a factor 4 of the smallest level
    are dropped, as are bins whose modulus is at roundoff.  The exponent
    is the log-log slope over the finest half of the remaining bins.  A
    slope that keeps increasing toward 1 on nested finer windows together
    with a Lipschitz quotient ``omega(d) / d`` growing linearly in
    ``log(1/d)`` is reported as ``C0,b-all``.
    """
    y_nodes = np.asarray(y_nodes, dtype=float)
    if y_nodes.ndim == 1:
        y_nodes = y_nodes[:, None]
    rho = _check_sampling(y_nodes, rho_nodes)
    F = np.asarray(F, dtype=float)
    if F.shape != (y_nodes.shape[0], rho.size):
        raise ConfigurationError(f"F must have shape {(y_nodes.shape[0], rho.size)}")
    cands = default_candidates() if candidate_grid is None else np.sort(np.asarray(candidate_grid, float))
    predicted = theorem_class(a) if a is not None else None

    # boundary extension: the rho -> 0 limit of each node's samples joins the point set
    order = np.argsort(rho)
    Fb = boundary_limit(F[:, order])
    rho_all = np.concatenate([[0.0], rho])
    F_all = np.column_stack([Fb, F])
    Y = np.repeat(y_nodes, rho_all.size, axis=0)
    R = np.tile(rho_all, y_nodes.shape[0])
    points = np.column_stack([Y, R])
    values = F_all.ravel()
    if points.shape[0] > max_points:
        keep = np.sort(np.random.default_rng(seed).choice(points.shape[0], max_points, replace=False))
        points, values = points[keep], values[keep]

    floor = 1e3 * np.finfo(float).eps * max(float(np.max(np.abs(values))), 1e-300)
    dmin = float(rho.min()) * (1.0 - np.max(rho[1:] / rho[:-1]) if rho[1] < rho[0] else 1.0)
    span = np.ptp(points, axis=0)
    dmax = float(np.sqrt(np.sum(span ** 2)))
    log2_lo = int(math.floor(math.log2(max(min(dmin, rho.min()), 1e-300))))
    nbins = int(math.ceil(math.log2(dmax))) - log2_lo + 1
    maxdiff, lipq, count = pair_modulus(points, values, 1.0, log2_lo, nbins)
    d = 2.0 ** (np.arange(nbins) + log2_lo)

    usable = (count > 0) & (d >= 4.0 * rho.min()) & (d <= 0.25 * rho.max())
    valid = usable & (maxdiff > floor)
    pairs = int(count[usable].sum())
    if not valid.any():
        measured = RegularityClass("C0,1", 1.0)
        return HolderReport(1.0, 0.0, pairs, measured, predicted,
                            None if predicted is None else measured == predicted, (1.0,), 0.0)
    idx = np.flatnonzero(valid)  # finest scales first
    if idx.size < 4:
        raise ResolutionError("too few distance scales with resolved differences")
    x = np.log(d[idx])
    fine = max(3, idx.size // 2)

    def quotient_slope(alpha, m=fine):
        # slope of log sup|dF|/dist^alpha against log d; negative means divergence as d -> 0
        q = lipq if alpha == 1.0 else pair_modulus(points, values, alpha, log2_lo, nbins)[1]
        return _slope(x[:m], np.log(q[idx][:m]))

    nested = []
    for frac in (1.0, 2.0 / 3.0, 0.5, 1.0 / 3.0):
        m = max(3, int(round(frac * idx.size)))
        nested.append(1.0 + quotient_slope(1.0, m))
    lip = lipq[idx]
    lip_slope = _slope(-x / math.log(2.0), lip / max(lip.max(), 1e-300))

    increasing = all(nested[i + 1] >= nested[i] - 0.005 for i in range(len(nested) - 1))
    log_growth = increasing and nested[-1] > 0.8 and nested[-1] - nested[0] > 0.02 and lip_slope > 0
    if log_growth:
        # omega(d) / d grows like log(1/d): check that the growth is slower than any power
        power_slope = _slope(x, np.log(lip / lip[-1]))
        log_growth = power_slope > -(1.0 - nested[-1]) - 0.05
    if log_growth:
        measured = RegularityClass("C0,b-all")
        exponent = nested[-1]
    elif nested[2] >= 1.0 - lipschitz_tolerance:
        measured = RegularityClass("C0,1", 1.0)
        exponent = 1.0
    else:
        # largest candidate whose Hölder quotient stays bounded toward fine scales
        lo, hi = 0, cands.size - 1
        if quotient_slope(float(cands[0])) < -STABLE_SLOPE:
            hi = -1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if quotient_slope(float(cands[mid])) >= -STABLE_SLOPE:
                lo = mid
            else:
                hi = mid - 1
        exponent = float(cands[max(hi, 0)])
        measured = RegularityClass("C0,a", exponent)
    q = lipq if exponent >= 1.0 else pair_modulus(points, values, exponent, log2_lo, nbins)[1]
    agreement = None
    if predicted is not None:
        agreement = measured.code == predicted.code and (
            predicted.exponent is None or abs(exponent - predicted.exponent) <= 0.05)
    return HolderReport(float(exponent), float(q[idx].max()), pairs, measured, predicted, agreement,
                        tuple(nested), float(lip_slope))


__all__ = [
    "CLASS_CODES", "CompactifiedGrid", "RegularityClass", "HolderReport", "compactify",
    "gbar_normal_derivative", "gbar_normal_derivative_fd", "first_derivative_norm", "theorem_class",
    "classify_regularity", "estimate_holder_exponent", "boundary_limit", "default_candidates",
]
