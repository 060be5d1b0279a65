"""Riccati flows of the level-set shape operator and their tangential derivatives.

Along each normal geodesic the mixed shape operator ``S`` and the
tangential metric ``g`` satisfy::

    S' = -S S - N,        g' = S^T g + g S,

with ``N = R(., d_r) d_r`` the normal curvature operator, ``N ~ -I``.
Everything is integrated in deviation variables so that exponentially
small quantities keep full relative precision:

* ``D = S - I`` stored as ``Dh = e^{k r} D`` with ``k = min(a, 2)``;
* ``gbar = e^{-2r} g`` evolves by ``gbar' = D^T gbar + gbar D``;
* ``E = N + I`` is supplied directly by the profile.

Tangential derivatives use ``dW = e^{2r} dS`` and obey::

    (dW)'   = -(dW D + D dW) - e^{2r} dN
    (dgbar)' = dS^T gbar + gbar dS + D^T dgbar + dgbar D

and, for second derivatives (indices nu, mu)::

    (ddW)'   = -(ddW D + D ddW) - e^{2r}(dS_mu dS_nu + dS_nu dS_mu) - e^{2r} ddN
    (ddgbar)' = ddS^T gbar + gbar ddS + dS_mu^T dgbar_nu + dgbar_nu dS_mu
                + dS_nu^T dgbar_mu + dgbar_mu dS_nu + D^T ddgbar + ddgbar D

Each block is rescaled by its expected growth before integration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConfigurationError,
    FlowDegeneracyError,
    HypothesisWarning,
    InstabilityError,
    PositivityViolation,
    PreconditionError,
)
from .ode import ATOL, RTOL, integrate
from .tensors import DEGENERACY_RATIO

R_MAX = 40.0
R_STEP = 0.1
ENVELOPE_DELTA = 0.5
ENVELOPE_FACTOR = 1e6
SOURCE_MODES = ("full", "coupled")


def sample_grid(r_max: float = R_MAX, step: float = R_STEP):
    count = int(round(r_max / step))
    return np.linspace(0.0, count * step, count + 1)


# ---------------------------------------------------------------------------
# scalar equation


@dataclass(frozen=True)
class ScalarRiccatiResult:
    r_samples: np.ndarray
    lambda_samples: np.ndarray
    floor_mu: float
    blowup_flag: bool
    deviation_samples: np.ndarray = field(repr=False, default=None)

    @property
    def abs_deviation(self):
        """``|lambda - 1|`` at full relative precision."""
        return np.abs(self.deviation_samples)


def integrate_scalar_riccati(f: Callable[[float], float], lambda0: float, r_max: float = R_MAX,
                             rtol: float = RTOL, atol: float = ATOL, *,
                             deviation: Optional[Callable[[float], float]] = None,
                             rate: Optional[float] = None, epsilon: Optional[float] = None,
                             step: float = R_STEP, allow_blowup: bool = False) -> ScalarRiccatiResult:
    """Integrate ``lambda' = f - lambda^2`` from ``lambda(0) = lambda0``.

    Parameters
    ----------
    f : callable
        Forcing, expected to satisfy ``f > epsilon`` and ``|f - 1| <= J e^{-a r}``.
    deviation : callable, optional
        Exact ``f - 1``; avoids cancellation when ``f`` is within rounding of 1.
    rate : float, optional
        Decay rate ``a`` of ``f - 1``; the deviation ``lambda - 1`` is
        integrated after multiplication by ``e^{min(a, 2) r}``.
    epsilon : float, optional
        Lower bound of ``f``; estimated from samples when omitted.

    Returns
    -------
    ScalarRiccatiResult
        ``floor_mu`` is the certified floor ``mu`` with ``2 mu^2 < epsilon``
        and ``mu < lambda0``; it is 0 when no positive ``epsilon`` exists.
    """
    if not lambda0 > 0:
        raise PreconditionError("lambda0 must be positive")
    if r_max > 700:
        raise ConfigurationError("r_max beyond the double-precision cap")
    dev = deviation if deviation is not None else (lambda r: f(r) - 1.0)
    k = 0.0 if rate is None else min(float(rate), 2.0)
    r_eval = sample_grid(r_max, step)
    if epsilon is None:
        epsilon = float(min(f(r) for r in r_eval))
    mu = 0.99 * min(math.sqrt(epsilon / 2.0), lambda0) if epsilon > 0 else 0.0

    def rhs(r, y):
        d = y[0]
        return [(k - 2.0) * d + math.exp(k * r) * dev(r) - math.exp(-k * r) * d * d]

    def crossing(r, y):
        return 1.0 + math.exp(-k * r) * y[0]

    crossing.terminal = True
    r, Y, hit = integrate(rhs, (0.0, r_eval[-1]), [lambda0 - 1.0], r_eval, rtol, atol,
                          events=[crossing], label="scalar Riccati")
    devs = Y[:, 0] * np.exp(-k * r)
    lam = 1.0 + devs
    if hit is not None:
        if not allow_blowup:
            raise PositivityViolation(
                f"lambda reached 0 near r = {r[-1]:.4g}; forcing violates the hypotheses "
                "or the integrator failed"
            )
        return ScalarRiccatiResult(r, lam, 0.0, True, devs)
    if mu > 0 and np.any(lam <= mu):
        i = int(np.argmax(lam <= mu))
        raise PositivityViolation(f"lambda = {lam[i]:.3e} <= certified floor {mu:.3e} at r = {r[i]:.4g}")
    return ScalarRiccatiResult(r, lam, mu, False, devs)


# ---------------------------------------------------------------------------
# curvature profiles

MatrixField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CurvatureProfile:
    """Normal curvature data along the end.

    Parameters
    ----------
    a, J : decay rate and amplitude, ``||N + I|| <= J e^{-a r}``.
    n : tangential dimension.
    normal_deviation : ``(r, y) -> E = N + I`` (n x n, mixed indices ``E[beta, alpha]``).
    first_source, second_source : optional ``(r, y) ->`` arrays of shape
        ``(n, n, n)`` and ``(n, n, n, n)``: the tangential derivatives of
        ``N`` (mode ``"full"``) or their remainders after the Christoffel
        coupling (mode ``"coupled"``).
    """

    a: float
    J: float
    n: int
    normal_deviation: MatrixField
    first_source: Optional[Callable] = None
    second_source: Optional[Callable] = None
    source_mode: str = "full"
    label: str = "profile"
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError("decay rate a must be positive")
        if self.J < 0:
            raise ConfigurationError("amplitude J must be nonnegative")
        if self.source_mode not in SOURCE_MODES:
            raise ConfigurationError(f"source_mode must be one of {SOURCE_MODES}")
        if self.validate:
            self.check_bound()

    def normal_operator(self, r, y):
        return self.normal_deviation(r, y) - np.eye(self.n)

    def check_bound(self, y_samples=None, r_samples=None, slack=1e-9):
        """Verify ``||E(r, y)||_op <= J e^{-a r}`` on a sample set."""
        ys = np.zeros((1, self.n)) if y_samples is None else np.atleast_2d(y_samples)
        rs = np.linspace(0.0, R_MAX, 81) if r_samples is None else r_samples
        for y in ys:
            for r in rs:
                E = np.asarray(self.normal_deviation(r, y), dtype=float)
                if E.shape != (self.n, self.n):
                    raise ConfigurationError(f"normal_deviation returned shape {E.shape}")
                bound = self.J * math.exp(-self.a * r)
                if np.linalg.norm(E, 2) > bound * (1 + slack) + 1e-300:
                    raise ConfigurationError(
                        f"profile violates ||N + I|| <= J e^(-a r) at r = {r:.3g}, y = {y}"
                    )

    @property
    def rescale(self):
        """Rescaling exponents ``(k, s1, t1, s2, t2)`` of ``D, dW, dgbar, ddW, ddgbar``."""
        a = min(self.a, 2.0)
        return a, 3.0 - a, max(1.0 - self.a, 0.0), 4.0 - a, max(2.0 - self.a, 0.0)


def _diag_weights(n, anisotropy):
    if n == 1:
        return np.ones(1)
    return 1.0 - anisotropy * np.arange(n) / (n - 1)


def isotropic_profile(n: int, a: float, J: float, **kw) -> CurvatureProfile:
    """``E = J e^{-a r} I``."""
    return CurvatureProfile(a, J, n, lambda r, y: J * math.exp(-a * r) * np.eye(n),
                            label=f"isotropic(a={a})", **kw)


def anisotropic_profile(n: int, a: float, J: float = 1.0, anisotropy: float = 0.5,
                        modulation: float = 0.3, sign: float = 1.0,
                        first_source=None, second_source=None, source_mode: str = "full",
                        label: Optional[str] = None) -> CurvatureProfile:
    """Diagonal ``E = sign J e^{-a r} diag(w_i (1 + m sin(y . k_i + p_i)) / (1 + m))``.

    Weights ``w_i`` decrease linearly from 1 to ``1 - anisotropy``.  With
    no sources supplied the exact tangential derivatives of ``E`` are used
    (mode ``"full"``), which makes the profile self-consistent.
    """
    w = _diag_weights(n, anisotropy)
    m = modulation
    K = np.array([[1.0 + 0.5 * ((i + j) % 3) for j in range(n)] for i in range(n)])
    P = np.linspace(0.0, 1.0, n)

    def amp(r):
        return sign * J * math.exp(-a * r) / (1.0 + m)

    def E(r, y):
        return amp(r) * np.diag(w * (1.0 + m * np.sin(K @ y + P)))

    def dE(r, y):
        c = np.cos(K @ y + P)
        out = np.zeros((n, n, n))
        for mu in range(n):
            out[mu] = amp(r) * np.diag(w * m * c * K[:, mu])
        return out

    def ddE(r, y):
        s = np.sin(K @ y + P)
        out = np.zeros((n, n, n, n))
        for nu in range(n):
            for mu in range(n):
                out[nu, mu] = -amp(r) * np.diag(w * m * s * K[:, mu] * K[:, nu])
        return out

    if first_source is None and second_source is None and source_mode == "full":
        first_source, second_source = dE, ddE
    return CurvatureProfile(a, J, n, E, first_source, second_source, source_mode,
                            label or f"anisotropic(a={a})")


def saturating_sources(n: int, a: float, c1: float = 1.0, c2: float = 1.0, seed: int = 0):
    """Sources that saturate the admissible growth of tangential curvature derivatives.

    ``dN_mu = c1 e^{(1-a) r} sin(y_mu + 1) A_mu`` and
    ``ddN_{nu mu} = c2 e^{(2-a) r} cos(y_nu + y_mu) B_{nu mu}`` with fixed
    symmetric patterns ``A``, ``B`` drawn from ``seed``.
    """
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.5, 1.0, (n, n, n))
    A = 0.5 * (A + np.swapaxes(A, 1, 2))
    B = rng.uniform(0.5, 1.0, (n, n, n, n))
    B = 0.5 * (B + np.swapaxes(B, 2, 3))
    B = 0.5 * (B + np.swapaxes(B, 0, 1))

    def first(r, y):
        return c1 * math.exp((1.0 - a) * r) * np.sin(np.asarray(y) + 1.0)[:, None, None] * A

    def second(r, y):
        y = np.asarray(y)
        return c2 * math.exp((2.0 - a) * r) * np.cos(y[:, None] + y[None, :])[:, :, None, None] * B

    return first, second


def rate_profile(n: int, a: float, J: float = 1.0, source_mode: str = "full",
                 c1: float = 1.0, c2: float = 1.0, seed: int = 0) -> CurvatureProfile:
    """Anisotropic profile driven by saturating derivative sources."""
    first, second = saturating_sources(n, a, c1, c2, seed)
    return anisotropic_profile(n, a, J, first_source=first, second_source=second,
                               source_mode=source_mode, label=f"rate(a={a},{source_mode})")


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class FlowTrajectory:
    """Samples of the flow along the normal geodesics through ``y_nodes``.

    Arrays carry a leading node axis then the sample axis.  ``D = S - I``
    and ``gbar = e^{-2r} g`` are stored; ``S``, ``g`` and ``W = e^{2r} S``
    are derived views.  Derivative arrays are ``dS[k, i, mu, beta, alpha]``,
    ``dgbar[k, i, mu, a, b]`` and analogous second derivatives with indices
    ``(nu, mu)``.
    """

    r_samples: np.ndarray
    y_nodes: np.ndarray
    D_series: np.ndarray
    gbar_series: np.ndarray
    a: float
    dS_series: Optional[np.ndarray] = None
    dgbar_series: Optional[np.ndarray] = None
    d2S_series: Optional[np.ndarray] = None
    d2gbar_series: Optional[np.ndarray] = None
    source_mode: str = "full"

    @property
    def n(self) -> int:
        return self.D_series.shape[-1]

    @property
    def S_series(self):
        return self.D_series + np.eye(self.n)

    @property
    def g_series(self):
        return np.exp(2 * self.r_samples)[None, :, None, None] * self.gbar_series

    @property
    def W_series(self):
        return np.exp(2 * self.r_samples)[None, :, None, None] * self.S_series

    @property
    def dW_series(self):
        if self.dS_series is None:
            return None
        return np.exp(2 * self.r_samples)[None, :, None, None, None] * self.dS_series

    @property
    def d2W_series(self):
        if self.d2S_series is None:
            return None
        return np.exp(2 * self.r_samples)[None, :, None, None, None, None] * self.d2S_series

    def shape_eigenvalue_deviation(self):
        """Eigenvalues of ``S - I`` (real parts, ascending) at every sample."""
        ev = np.linalg.eigvals(self.D_series)
        return np.sort(ev.real, axis=-1)

    def deviation_norm(self):
        """Operator norm ``|S - I|``."""
        return np.linalg.norm(self.D_series, ord=2, axis=(-2, -1))

    def norm_dW(self):
        return _frob(self.dW_series, 3)

    def norm_dgbar(self):
        return _frob(self.dgbar_series, 3)

    def norm_d2gbar(self):
        return _frob(self.d2gbar_series, 4)

    def norm_d2W(self):
        return _frob(self.d2W_series, 4)

    def metric_band(self):
        """Extreme eigenvalues of ``gbar`` relative to its initial value, per node."""
        g0 = self.gbar_series[:, :1]
        L = np.linalg.cholesky(g0)
        Linv = np.linalg.inv(L)
        rel = Linv @ self.gbar_series @ np.swapaxes(Linv, -1, -2)
        ev = np.linalg.eigvalsh(0.5 * (rel + np.swapaxes(rel, -1, -2)))
        return ev[..., 0].min(), ev[..., -1].max()


def _frob(T, k):
    if T is None:
        return None
    return np.sqrt(np.sum(T.reshape(T.shape[:2] + (-1,)) ** 2, axis=-1))


# ---------------------------------------------------------------------------
# state layout and right-hand sides


class _Layout:
    def __init__(self, n, order):
        self.n, self.order = n, order
        n2 = n * n
        sizes = [("D", (n, n)), ("gbar", (n, n))]
        if order >= 1:
            sizes += [("P1", (n, n, n)), ("Q1", (n, n, n))]
        if order >= 2:
            sizes += [("P2", (n, n, n, n)), ("Q2", (n, n, n, n))]
        self.slices, self.shapes = {}, {}
        off = 0
        for name, shp in sizes:
            size = int(np.prod(shp))
            self.slices[name] = slice(off, off + size)
            self.shapes[name] = shp
            off += size
        self.size = off
        del n2

    def unpack(self, y):
        return {k: y[s].reshape(self.shapes[k]) for k, s in self.slices.items()}

    def pack(self, parts):
        y = np.empty(self.size)
        for k, s in self.slices.items():
            y[s] = np.asarray(parts[k], dtype=float).ravel()
        return y


def _christoffel(gbar, Q):
    """``Gam[mu, beta, sigma] = Gamma^beta_{mu sigma}`` of ``gbar`` from ``Q[mu] = d_mu gbar``."""
    ginv = np.linalg.inv(gbar)
    # G1[l, mu, s] = (Q[mu, l, s] + Q[s, l, mu] - Q[l, mu, s]) / 2
    G1 = 0.5 * (np.einsum("mls->lms", Q) + np.einsum("slm->lms", Q) - Q)
    Gam = np.einsum("bl,lms->mbs", ginv, G1)
    return Gam, ginv, G1


def _christoffel_derivative(ginv, Q, Q2, Gam):
    """``dGam[nu, mu, beta, sigma] = d_nu Gamma^beta_{mu sigma}``."""
    dG1 = 0.5 * (np.einsum("nmls->nlms", Q2) + np.einsum("nslm->nlms", Q2)
                 - Q2)
    term1 = -np.einsum("bp,npq,mqs->nmbs", ginv, Q, Gam)
    term2 = np.einsum("bl,nlms->nmbs", ginv, dG1)
    return term1 + term2


class _System:
    def __init__(self, profile: CurvatureProfile, y, order: int):
        self.p = profile
        self.y = np.asarray(y, dtype=float)
        self.order = order
        self.L = _Layout(profile.n, order)
        self.k, self.s1, self.t1, self.s2, self.t2 = profile.rescale
        if order >= 1 and profile.first_source is None:
            raise ConfigurationError("first-derivative system needs first_source")
        if order >= 2 and profile.second_source is None:
            raise ConfigurationError("second-derivative system needs second_source")

    def dN(self, r, E, gbar, Q):
        s = np.asarray(self.p.first_source(r, self.y), dtype=float)
        if self.p.source_mode == "full":
            return s, None
        Gam, ginv, _ = _christoffel(gbar, Q)
        return s - Gam @ E + E @ Gam, (Gam, ginv)

    def ddN(self, r, E, dN, gbar, Q, Q2, cache):
        s = np.asarray(self.p.second_source(r, self.y), dtype=float)
        if self.p.source_mode == "full":
            return s
        Gam, ginv = cache
        dGam = _christoffel_derivative(ginv, Q, Q2, Gam)
        # d_nu of (-Gam_mu E + E Gam_mu)
        return (s - dGam @ E[None, None] + E[None, None] @ dGam
                - Gam[None] @ dN[:, None] + dN[:, None] @ Gam[None])

    def rhs(self, r, y):
        u = self.L.unpack(y)
        k = self.k
        Dh, gbar = u["D"], u["gbar"]
        ek = math.exp(-k * r)
        D = ek * Dh
        E = np.asarray(self.p.normal_deviation(r, self.y), dtype=float)
        out = {
            "D": (k - 2.0) * Dh - ek * (Dh @ Dh) - math.exp(k * r) * E,
            "gbar": D.T @ gbar + gbar @ D,
        }
        if self.order >= 1:
            s1, t1 = self.s1, self.t1
            P1, Q1h = u["P1"], u["Q1"]
            Q1 = math.exp(t1 * r) * Q1h
            dN, cache = self.dN(r, E, gbar, Q1)
            DT = D.T
            out["P1"] = -s1 * P1 - (P1 @ D + D @ P1) - math.exp((2.0 - s1) * r) * dN
            dS = math.exp((s1 - 2.0) * r) * P1
            PT = np.swapaxes(dS, -1, -2)
            out["Q1"] = (-t1 * Q1h + math.exp(-t1 * r) * (PT @ gbar + gbar @ dS)
                         + DT @ Q1h + Q1h @ D)
        if self.order >= 2:
            s2, t2 = self.s2, self.t2
            P2, Q2h = u["P2"], u["Q2"]
            Q2 = math.exp(t2 * r) * Q2h
            ddN = self.ddN(r, E, dN, gbar, Q1, Q2, cache)
            quad = dS[None] @ dS[:, None] + dS[:, None] @ dS[None]  # [nu, mu]
            out["P2"] = (-s2 * P2 - (P2 @ D + D @ P2)
                         - math.exp((2.0 - s2) * r) * (quad + ddN))
            ddS = math.exp((s2 - 2.0) * r) * P2
            ddST = np.swapaxes(ddS, -1, -2)
            cross = (PT[None] @ Q1[:, None] + Q1[:, None] @ dS[None]
                     + PT[:, None] @ Q1[None] + Q1[None] @ dS[:, None])
            out["Q2"] = (-t2 * Q2h + math.exp(-t2 * r) * (ddST @ gbar + gbar @ ddS + cross)
                         + DT @ Q2h + Q2h @ D)
        return self.L.pack(out)


def _initial_state(L: _Layout, k, s1, t1, s2, t2, S0, g0, dS0=None, dg0=None, d2S0=None, d2g0=None):
    n = L.n
    parts = {"D": np.asarray(S0, dtype=float) - np.eye(n), "gbar": np.asarray(g0, dtype=float)}
    if L.order >= 1:
        parts["P1"] = np.zeros((n, n, n)) if dS0 is None else np.asarray(dS0, dtype=float)
        parts["Q1"] = np.zeros((n, n, n)) if dg0 is None else np.asarray(dg0, dtype=float)
    if L.order >= 2:
        parts["P2"] = np.zeros((n,) * 4) if d2S0 is None else np.asarray(d2S0, dtype=float)
        parts["Q2"] = np.zeros((n,) * 4) if d2g0 is None else np.asarray(d2g0, dtype=float)
    # at r = 0 every rescaling factor is 1 and dW = dS
    return L.pack(parts)


def _per_node(value, y, n, rank):
    if callable(value):
        return np.asarray(value(y), dtype=float)
    arr = np.asarray(value, dtype=float)
    return arr


def _run(profile: CurvatureProfile, S0, g0, y_nodes, order, r_max, rtol, atol, step,
         initial_derivatives=None):
    n = profile.n
    y_nodes = np.atleast_2d(np.asarray(y_nodes, dtype=float))
    if y_nodes.shape[1] != n:
        raise ConfigurationError(f"y nodes must have {n} coordinates")
    if r_max > 700:
        raise ConfigurationError("r_max beyond the double-precision cap")
    r_eval = sample_grid(r_max, step)
    init = initial_derivatives or {}
    Ds, gs, dSs, dgs, d2Ss, d2gs = [], [], [], [], [], []
    for y in y_nodes:
        S0y = _per_node(S0, y, n, 2)
        g0y = _per_node(g0, y, n, 2)
        _check_initial(S0y, g0y)
        sysm = _System(profile, y, order)
        k, s1, t1, s2, t2 = profile.rescale
        extra = {key: _per_node(v, y, n, 0) for key, v in init.items()}
        y0 = _initial_state(sysm.L, k, s1, t1, s2, t2, S0y, g0y, **extra)
        r, Y = integrate(sysm.rhs, (0.0, r_eval[-1]), y0, r_eval, rtol, atol,
                         label=f"Riccati system (order {order}) at y = {y}")
        parts = [sysm.L.unpack(row) for row in Y]
        Ds.append(np.array([p["D"] for p in parts]) * np.exp(-k * r)[:, None, None])
        gs.append(np.array([p["gbar"] for p in parts]))
        if order >= 1:
            P1 = np.array([p["P1"] for p in parts])
            dSs.append(P1 * np.exp((s1 - 2.0) * r)[:, None, None, None])
            dgs.append(np.array([p["Q1"] for p in parts]) * np.exp(t1 * r)[:, None, None, None])
            _check_envelope(r, P1, "first")
        if order >= 2:
            P2 = np.array([p["P2"] for p in parts])
            d2Ss.append(P2 * np.exp((s2 - 2.0) * r)[:, None, None, None, None])
            d2gs.append(np.array([p["Q2"] for p in parts]) * np.exp(t2 * r)[:, None, None, None, None])
            _check_envelope(r, P2, "second")
    traj = FlowTrajectory(
        r_samples=r, y_nodes=y_nodes, D_series=np.array(Ds), gbar_series=np.array(gs),
        a=profile.a,
        dS_series=np.array(dSs) if order >= 1 else None,
        dgbar_series=np.array(dgs) if order >= 1 else None,
        d2S_series=np.array(d2Ss) if order >= 2 else None,
        d2gbar_series=np.array(d2gs) if order >= 2 else None,
        source_mode=profile.source_mode,
    )
    _check_flow(traj)
    return traj


def _check_initial(S0, g0):
    g0 = np.asarray(g0)
    if not np.allclose(g0, g0.T, rtol=1e-12, atol=0):
        raise PreconditionError("g0 must be symmetric")
    ev = np.linalg.eigvalsh(g0)
    if ev[0] <= DEGENERACY_RATIO * ev[-1]:
        raise PreconditionError("g0 must be positive definite")
    S_low = g0 @ S0
    if not np.allclose(S_low, S_low.T, rtol=1e-10, atol=1e-12):
        raise PreconditionError("S0 must be self-adjoint with respect to g0")
    if np.linalg.eigvals(S0).real.min() <= 0:
        raise PreconditionError("S0 must be positive definite (convex initial slice)")


def _check_envelope(r, P, which):
    size = np.sqrt(np.sum(P.reshape(P.shape[0], -1) ** 2, axis=1))
    ref = 1.0 + size[0]
    bound = ENVELOPE_FACTOR * ref * np.exp(ENVELOPE_DELTA * r)
    if np.any(size > bound):
        i = int(np.argmax(size > bound))
        raise InstabilityError(
            f"{which}-derivative system left its growth envelope at r = {r[i]:.4g}"
        )


def _check_flow(traj: FlowTrajectory):
    ev = np.linalg.eigvalsh(traj.gbar_series)
    if np.any(ev[..., 0] <= DEGENERACY_RATIO * ev[..., -1]):
        raise FlowDegeneracyError("tangential metric lost positive definiteness")
    lam = 1.0 + traj.shape_eigenvalue_deviation()
    if np.any(lam <= 0):
        warnings.warn("shape operator eigenvalue left the positive band", HypothesisWarning,
                      stacklevel=3)


def integrate_riccati_system(profile: CurvatureProfile, S0, g0, y_patch=None, r_max: float = R_MAX,
                             rtol: float = RTOL, atol: float = ATOL, step: float = R_STEP) -> FlowTrajectory:
    """Integrate ``S' = -S^2 - N``, ``g' = S^T g + g S`` along each node of ``y_patch``.

    ``S0`` and ``g0`` are arrays or callables of ``y``.  ``g0`` is the metric
    at ``r = 0`` (equal to ``gbar`` there).
    """
    y_patch = np.zeros((1, profile.n)) if y_patch is None else y_patch
    return _run(profile, S0, g0, y_patch, 0, r_max, rtol, atol, step)


def integrate_first_derivative_system(trajectory: FlowTrajectory, profile: CurvatureProfile, S0, g0,
                                      rtol: float = RTOL, atol: float = ATOL,
                                      dS0=None, dg0=None) -> FlowTrajectory:
    """Co-integrate the base flow with ``(dW, dgbar)`` on the trajectory's nodes and samples.

    Returns a new trajectory whose base samples come from the joint
    integration (they agree with ``trajectory`` to integrator tolerance).
    """
    step = float(trajectory.r_samples[1] - trajectory.r_samples[0])
    init = {"dS0": dS0, "dg0": dg0}
    init = {k: v for k, v in init.items() if v is not None}
    return _run(profile, S0, g0, trajectory.y_nodes, 1, float(trajectory.r_samples[-1]),
                rtol, atol, step, init)


def integrate_second_derivative_system(trajectory: FlowTrajectory, profile: CurvatureProfile, S0, g0,
                                       rtol: float = RTOL, atol: float = ATOL,
                                       allow_below_threshold: bool = False, **initial) -> FlowTrajectory:
    """Co-integrate base, first and second tangential derivatives.

    The growth rates are only predicted for ``a > 1``; other rates raise
    unless ``allow_below_threshold`` is set.
    """
    if profile.a <= 1 and not allow_below_threshold:
        raise PreconditionError("second-derivative rates require a > 1")
    step = float(trajectory.r_samples[1] - trajectory.r_samples[0])
    init = {k: v for k, v in initial.items() if v is not None}
    return _run(profile, S0, g0, trajectory.y_nodes, 2, float(trajectory.r_samples[-1]),
                rtol, atol, step, init)


# ---------------------------------------------------------------------------
# finite-difference cross-validation


def finite_difference_derivatives(profile: CurvatureProfile, S0, g0, y, h: float = 1e-3,
                                  r_max: float = 10.0, step: float = R_STEP, rtol: float = 1e-12,
                                  atol: float = 1e-14):
    """Central differences of ``(S, gbar)`` across neighbouring geodesics.

    Returns ``(r, dS, dgbar)`` with ``dS[i, mu]`` and ``dgbar[i, mu]`` at the
    samples of the geodesic through ``y``.  The profile's normal operator
    must depend smoothly on ``y`` for this to be meaningful.
    """
    y = np.asarray(y, dtype=float)
    n = profile.n
    nodes = []
    for mu in range(n):
        e = np.zeros(n)
        e[mu] = h
        nodes += [y + e, y - e]
    traj = _run(profile, S0, g0, np.array(nodes), 0, r_max, rtol, atol, step)
    D, G = traj.D_series, traj.gbar_series
    dS = np.stack([(D[2 * mu] - D[2 * mu + 1]) / (2 * h) for mu in range(n)], axis=1)
    dg = np.stack([(G[2 * mu] - G[2 * mu + 1]) / (2 * h) for mu in range(n)], axis=1)
    return traj.r_samples, dS, dg


# ---------------------------------------------------------------------------
# domination by model systems


@dataclass(frozen=True)
class DominationResult:
    dominated: bool
    first_violation: Optional[tuple]  # (index, r, which)
    margin_x: float
    margin_y: float


def check_domination(x_series, y_series, model_u, model_v, r=None) -> DominationResult:
    """Check ``x < u`` and ``y < v`` at every sample.

    Raises
    ------
    PreconditionError
        If the initial ordering ``x(0) < u(0)``, ``y(0) < v(0)`` fails.
    """
    x, y = np.asarray(x_series, float), np.asarray(y_series, float)
    u, v = np.asarray(model_u, float), np.asarray(model_v, float)
    if not (x.shape == y.shape == u.shape == v.shape):
        raise PreconditionError("series must share one sample grid")
    if not (x[0] < u[0] and y[0] < v[0]):
        raise PreconditionError("initial data must satisfy x(t0) < u(t0) and y(t0) < v(t0)")
    bad_x = ~(x < u)
    bad_y = ~(y < v)
    viol = None
    if bad_x.any() or bad_y.any():
        ix = int(np.argmax(bad_x)) if bad_x.any() else len(x)
        iy = int(np.argmax(bad_y)) if bad_y.any() else len(y)
        i, which = (ix, "x") if ix <= iy else (iy, "y")
        viol = (i, None if r is None else float(r[i]), which)
    with np.errstate(divide="ignore", invalid="ignore"):
        mx = float(np.nanmin(u / np.where(x > 0, x, np.nan))) if np.any(x > 0) else math.inf
        my = float(np.nanmin(v / np.where(y > 0, y, np.nan))) if np.any(y > 0) else math.inf
    return DominationResult(viol is None, viol, mx, my)


def domination_coefficients(traj: FlowTrajectory, profile: CurvatureProfile, node: int = 0):
    """Pointwise bounds of the linear first-derivative system in Frobenius norms.

    With ``x = |dW|`` and ``y = |dgbar|`` one has ``x' <= A x + B y + H``
    and ``y' <= C x + D y`` where ``A = 2|D|``, ``B = 3 e^{2r} |gbar^-1| |E|``
    (coupled mode, else 0), ``H = e^{2r} |source|``, ``C = 2 e^{-2r} |gbar|``
    and ``D = 2|D|``.  Returns a dict of arrays on the trajectory samples.
    """
    r = traj.r_samples
    Dm = traj.D_series[node]
    gb = traj.gbar_series[node]
    opD = np.linalg.norm(Dm, ord=2, axis=(-2, -1))
    opg = np.linalg.norm(gb, ord=2, axis=(-2, -1))
    opginv = 1.0 / np.linalg.eigvalsh(gb)[:, 0]
    y = traj.y_nodes[node]
    E = np.array([np.linalg.norm(profile.normal_deviation(t, y)) for t in r])
    H = np.array([np.linalg.norm(profile.first_source(t, y)) for t in r])
    A = 2.0 * opD
    B = 3.0 * np.exp(2 * r) * opginv * E if profile.source_mode == "coupled" else np.zeros_like(r)
    return {"A": A, "B": B, "H": np.exp(2 * r) * H, "C": 2.0 * np.exp(-2 * r) * opg, "D": 2.0 * opD}


def dominating_constant(traj: FlowTrajectory, profile: CurvatureProfile, node: int = 0,
                        safety: float = 1.5) -> float:
    """Smallest ``c`` (times ``safety``) for which the model system with ``b = 0``,
    ``Omega = 3 - a`` bounds every coefficient of the derivative system."""
    a = profile.a
    r = traj.r_samples
    co = domination_coefficients(traj, profile, node)
    cands = [
        co["A"] * np.exp(a * r),
        co["B"] * np.exp(-(2.0 - a) * r),
        co["H"] * np.exp(-(3.0 - a) * r),
        co["C"] * np.exp(2.0 * r),
        co["D"] * np.exp(a * r),
    ]
    return safety * float(max(np.max(c) for c in cands))


def dominate_first_derivatives(traj: FlowTrajectory, profile: CurvatureProfile, node: int = 0,
                               inflation: float = 2.0, floor: float = 0.1, safety: float = 1.5):
    """Compare ``(|dW|, |dgbar|)`` with the co-integrated first model system.

    The model uses ``b = 0``, ``Omega = 3 - a``, the constant from
    :func:`dominating_constant` and initial data ``inflation * x0 + floor``.
    Returns ``(DominationResult, ModelSolution)``.
    """
    from .errors import UnsupportedCaseError
    from .models import ModelParams, integrate_model_system

    if traj.dS_series is None:
        raise ConfigurationError("trajectory carries no first derivatives")
    if not profile.a < 2:
        raise UnsupportedCaseError("first-derivative domination is set up for 0 < a < 2")
    c = dominating_constant(traj, profile, node, safety)
    x = traj.norm_dW()[node]
    y = traj.norm_dgbar()[node]
    r = traj.r_samples
    step = float(r[1] - r[0])
    model = integrate_model_system(ModelParams.first_model(profile.a, c),
                                   inflation * x[0] + floor, inflation * y[0] + floor,
                                   r_max=float(r[-1]), step=step)
    return check_domination(x, y, model.u, model.v, r), model


def write_trajectory(traj: FlowTrajectory, path, node: int = 0) -> None:
    """Columnar export: r, eigenvalues of S, |S - I|, |dgbar|, |ddgbar|."""
    n = traj.n
    r = traj.r_samples
    ev = 1.0 + traj.shape_eigenvalue_deviation()[node]
    dev = traj.deviation_norm()[node]
    d1 = traj.norm_dgbar()
    d2 = traj.norm_d2gbar()
    header = ["r"] + [f"eig_S{i + 1}" for i in range(n)] + ["norm_S_minus_I", "norm_dgbar", "norm_d2gbar"]
    lines = [" ".join(header)]
    for i in range(r.size):
        row = [r[i]] + list(ev[i]) + [dev[i],
                                      d1[node, i] if d1 is not None else float("nan"),
                                      d2[node, i] if d2 is not None else float("nan")]
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


__all__ = [
    "ScalarRiccatiResult", "CurvatureProfile", "FlowTrajectory", "DominationResult",
    "integrate_scalar_riccati", "integrate_riccati_system", "integrate_first_derivative_system",
    "integrate_second_derivative_system", "finite_difference_derivatives", "check_domination",
    "dominating_constant", "domination_coefficients", "dominate_first_derivatives", "isotropic_profile", "anisotropic_profile",
    "saturating_sources", "rate_profile", "sample_grid", "write_trajectory",
]
