"""Linear comparison systems and the asymptotics of their solutions.

The model system for ``a != 2`` is::

    u' = c e^{-a r} u + c e^{(2-a) r} v + c e^{Omega r}
    v' = c e^{-2 r} u + c e^{-a r} v + b c e^{theta r}

and for ``a = 2`` the ``e^{-a r}`` factors become ``r e^{-2 r}``.
Eliminating one unknown gives second-order equations
``y'' + p y' + q y = s`` whose coefficients are exponential polynomials,
i.e. finite sums of ``coef * r^k * e^{lam r}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, PreconditionError, UnsupportedCaseError
from .fitting import fit_decay, fit_power
from .ode import integrate

REPEATED_ROOT_GAP = 1e-9
MIN_TRIALS = 3
MODEL_CAP = 1e250


# ---------------------------------------------------------------------------
# exponential polynomials


@dataclass(frozen=True)
class ExpPoly:
    """``sum_i coef_i * r^{k_i} * e^{lam_i r}`` stored as ``(coef, lam, k)`` triples."""

    terms: tuple = ()

    def __post_init__(self):
        merged = {}
        for coef, lam, k in self.terms:
            key = (float(lam), int(k))
            merged[key] = merged.get(key, 0.0) + float(coef)
        terms = tuple(sorted(((c, lam, k) for (lam, k), c in merged.items() if c != 0.0),
                             key=lambda t: (-t[1], -t[2])))
        object.__setattr__(self, "terms", terms)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for coef, lam, k in self.terms:
            out = out + coef * r ** k * np.exp(lam * r)
        return out if out.ndim else float(out)

    def __add__(self, other):
        return ExpPoly(self.terms + other.terms)

    def __neg__(self):
        return ExpPoly(tuple((-c, lam, k) for c, lam, k in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def shift(self, delta: float) -> "ExpPoly":
        """Multiply by ``e^{delta r}``."""
        return ExpPoly(tuple((c, lam + delta, k) for c, lam, k in self.terms))

    def derivative(self) -> "ExpPoly":
        out = []
        for c, lam, k in self.terms:
            out.append((c * lam, lam, k))
            if k:
                out.append((c * k, lam, k - 1))
        return ExpPoly(tuple(out))

    def constant(self) -> float:
        return sum(c for c, lam, k in self.terms if lam == 0.0 and k == 0)

    def perturbation(self) -> "ExpPoly":
        return ExpPoly(tuple(t for t in self.terms if not (t[1] == 0.0 and t[2] == 0)))

    def dominant(self):
        """``(lam, k)`` of the fastest-growing term, ``(-inf, 0)`` for zero."""
        if not self.terms:
            return -math.inf, 0
        _, lam, k = self.terms[0]
        return lam, k

    def is_zero(self) -> bool:
        return not self.terms


def _t(*terms):
    return ExpPoly(tuple(terms))


# ---------------------------------------------------------------------------
# parameters and reductions


@dataclass(frozen=True)
class ModelParams:
    a: float
    b: int
    c: float
    Omega: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError("a must be positive")
        if not self.c > 0:
            raise ConfigurationError("c must be positive")
        if self.b not in (0, 1):
            raise ConfigurationError("b must be 0 or 1")

    @property
    def degenerate(self) -> bool:
        return abs(self.a - 2.0) < REPEATED_ROOT_GAP

    @classmethod
    def first_model(cls, a, c=1.0):
        """``b = 0``, ``Omega = 3 - a``: dominates first tangential derivatives."""
        return cls(a, 0, c, 3.0 - a, 0.0)

    @classmethod
    def second_model(cls, a, c=1.0):
        """``b = 1``, ``Omega = 4 - a``, ``theta = 1 - a``: dominates second derivatives."""
        return cls(a, 1, c, 4.0 - a, 1.0 - a)


@dataclass(frozen=True)
class FirstOrderSystem:
    """``u' = uu u + uv v + su``, ``v' = vu u + vv v + sv`` with ExpPoly entries."""

    uu: ExpPoly
    uv: ExpPoly
    su: ExpPoly
    vu: ExpPoly
    vv: ExpPoly
    sv: ExpPoly


def model_first_order(p: ModelParams) -> FirstOrderSystem:
    a, b, c, Om, th = p.a, p.b, p.c, p.Omega, p.theta
    if p.degenerate:
        decay = _t((c, -2.0, 1))
        return FirstOrderSystem(decay, _t((c, 0.0, 0)), _t((c, Om, 0)),
                                _t((c, -2.0, 0)), decay, _t((b * c, th, 0)))
    decay = _t((c, -a, 0))
    return FirstOrderSystem(decay, _t((c, 2.0 - a, 0)), _t((c, Om, 0)),
                            _t((c, -2.0, 0)), decay, _t((b * c, th, 0)))


@dataclass(frozen=True)
class SecondOrderForm:
    """``y'' + p(r) y' + q(r) y = s(r)`` with asymptotic constants ``c1, c2``."""

    variable: str
    p: ExpPoly
    q: ExpPoly
    s: ExpPoly
    c1: float
    c2: float
    roots: tuple

    @property
    def repeated(self) -> bool:
        return abs(self.roots[1] - self.roots[0]) < REPEATED_ROOT_GAP

    def residual(self, r, y, dy, d2y):
        """Relative residual of the equation on sampled ``y, y', y''``."""
        p, q, s = self.p(r), self.q(r), self.s(r)
        lhs = d2y + p * dy + q * y
        scale = np.abs(d2y) + np.abs(p * dy) + np.abs(q * y) + np.abs(s)
        return np.abs(lhs - s) / np.where(scale > 0, scale, 1.0)


def characteristic_roots(c1: float, c2: float):
    """Real roots ``mu1 <= mu2`` of ``mu^2 + c1 mu + c2``."""
    disc = c1 * c1 - 4.0 * c2
    if disc < -REPEATED_ROOT_GAP:
        raise UnsupportedCaseError("complex characteristic roots are out of scope")
    sq = math.sqrt(max(disc, 0.0))
    return (0.5 * (-c1 - sq), 0.5 * (-c1 + sq))


def _form(variable, p, q, s):
    c1, c2 = p.constant(), q.constant()
    return SecondOrderForm(variable, p, q, s, c1, c2, characteristic_roots(c1, c2))


@dataclass(frozen=True)
class ModelReduction:
    u: SecondOrderForm
    v: SecondOrderForm

    def __getitem__(self, which):
        return {"u": self.u, "v": self.v}[which]


def reduce_to_second_order(p: ModelParams) -> ModelReduction:
    """Second-order equations satisfied by each unknown of the model system."""
    a, b, c, Om, th = p.a, p.b, p.c, p.Omega, p.theta
    if p.degenerate:
        u = _form(
            "u",
            _t((-2 * c, -2.0, 1)),
            _t((-c - c * c, -2.0, 0), (2 * c, -2.0, 1), (c * c, -4.0, 2)),
            _t((c * Om, Om, 0), (-c * c, Om - 2.0, 1), (b * c * c, th, 0)),
        )
        v = _form(
            "v",
            _t((2.0, 0.0, 0), (-2 * c, -2.0, 1)),
            _t((-c - c * c, -2.0, 0), (c * c, -4.0, 2)),
            _t((c * c, Om - 2.0, 0), (b * (2 + th) * c, th, 0), (-b * c * c, th - 2.0, 1)),
        )
        return ModelReduction(u, v)
    u = _form(
        "u",
        _t((a - 2.0, 0.0, 0), (-2 * c, -a, 0)),
        _t((2 * c, -a, 0), (-c * c, -a, 0), (c * c, -2 * a, 0)),
        _t((c * (Om - 2 + a), Om, 0), (-c * c, Om - a, 0), (b * c * c, th + 2 - a, 0)),
    )
    v = _form(
        "v",
        _t((2.0, 0.0, 0), (-2 * c, -a, 0)),
        _t((-(2 - a) * c, -a, 0), (c * c, -2 * a, 0), (-c * c, -a, 0)),
        _t((c * c, Om - 2.0, 0), (b * (2 + th) * c, th, 0), (-b * c * c, th - a, 0)),
    )
    return ModelReduction(u, v)


# ---------------------------------------------------------------------------
# growth predictions


@dataclass(frozen=True)
class GrowthDescriptor:
    """Growth ``r^{r_power} e^{exponent r}``."""

    exponent: float
    r_power: int = 0

    def describe(self) -> str:
        if self.exponent == 0 and self.r_power == 0:
            return "O(1)"
        rp = "" if self.r_power == 0 else ("r" if self.r_power == 1 else f"r^{self.r_power}")
        ex = "" if self.exponent == 0 else f"e^({self.exponent:g} r)"
        return f"O({rp}{' ' if rp and ex else ''}{ex})"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.maximum(r, 1.0) ** self.r_power * np.exp(self.exponent * r)


def predict_growth(form_roots, source: ExpPoly) -> GrowthDescriptor:
    """Generic growth for an asymptotically constant equation with the given roots and source."""
    mu1, mu2 = form_roots
    omega, k = source.dominant()
    if abs(mu2 - mu1) < REPEATED_ROOT_GAP:
        if abs(mu2) > REPEATED_ROOT_GAP:
            raise UnsupportedCaseError("repeated nonzero characteristic root")
        if omega < 0:
            return GrowthDescriptor(0.0, 1)
        if omega == 0:
            return GrowthDescriptor(0.0, k + 2)
        return GrowthDescriptor(omega, k)
    if omega > mu2:
        return GrowthDescriptor(omega, k)
    if omega == mu2:
        return GrowthDescriptor(mu2, k + 1)
    return GrowthDescriptor(mu2, 0)


def _check_perturbations(form: SecondOrderForm):
    for poly in (form.p, form.q):
        lam, _ = poly.perturbation().dominant()
        if lam >= 0:
            raise UnsupportedCaseError(
                f"{form.variable}-equation coefficients are not asymptotically constant"
            )


def predict_rate(p: ModelParams, which: str) -> GrowthDescriptor:
    """Generic growth of ``u`` or ``v`` for the model system ``p``."""
    if which not in ("u", "v"):
        raise ConfigurationError("which must be 'u' or 'v'")
    form = reduce_to_second_order(p)[which]
    _check_perturbations(form)
    return predict_growth(form.roots, form.s)


# ---------------------------------------------------------------------------
# integration


@dataclass(frozen=True)
class ModelSolution:
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    params: ModelParams

    def derivatives(self):
        """``(u', v', u'', v'')`` evaluated from the system itself."""
        sysm = model_first_order(self.params)
        r, u, v = self.r, self.u, self.v
        du = sysm.uu(r) * u + sysm.uv(r) * v + sysm.su(r)
        dv = sysm.vu(r) * u + sysm.vv(r) * v + sysm.sv(r)
        d2u = (sysm.uu.derivative()(r) * u + sysm.uu(r) * du + sysm.uv.derivative()(r) * v
               + sysm.uv(r) * dv + sysm.su.derivative()(r))
        d2v = (sysm.vu.derivative()(r) * u + sysm.vu(r) * du + sysm.vv.derivative()(r) * v
               + sysm.vv(r) * dv + sysm.sv.derivative()(r))
        return du, dv, d2u, d2v

    def reduction_residual(self):
        """Max relative residual of both second-order forms on this solution."""
        red = reduce_to_second_order(self.params)
        du, dv, d2u, d2v = self.derivatives()
        ru = red.u.residual(self.r, self.u, du, d2u)
        rv = red.v.residual(self.r, self.v, dv, d2v)
        return float(max(ru.max(), rv.max()))


def _safe_rate(p, which):
    try:
        g = predict_rate(p, which)
    except UnsupportedCaseError:
        return 0.0
    return max(g.exponent, 0.0)


def integrate_model_system(p: ModelParams, u0: float, v0: float, r_max: float = 40.0,
                           step: float = 0.1, rtol: float = 1e-10, atol: float = 1e-12,
                           r0: float = 0.0) -> ModelSolution:
    """Integrate the model system from ``(u0, v0)`` at ``r0``.

    The state is rescaled by the predicted exponential rates so it stays
    O(r^k) asymptotically; large ``c`` still produces a transient of size
    ``e^{O(c)}``, and a rescaled state above ``MODEL_CAP`` raises BlowupError.
    """
    if not (u0 > 0 and v0 > 0):
        raise PreconditionError("model initial data must be positive")
    s = model_first_order(p)
    au, av = _safe_rate(p, "u"), _safe_rate(p, "v")
    uu, uv, su = s.uu, s.uv.shift(av - au), s.su.shift(-au)
    vu, vv, sv = s.vu.shift(au - av), s.vv, s.sv.shift(-av)
    count = int(round((r_max - r0) / step))
    r_eval = r0 + step * np.arange(count + 1)

    def rhs(r, y):
        U, V = y
        return [-au * U + uu(r) * U + uv(r) * V + su(r),
                -av * V + vu(r) * U + vv(r) * V + sv(r)]

    y0 = [u0 * math.exp(-au * r0), v0 * math.exp(-av * r0)]
    r, Y = integrate(rhs, (r0, r_eval[-1]), y0, r_eval, rtol, atol, sentinel=MODEL_CAP,
                     label="model system")
    return ModelSolution(r, Y[:, 0] * np.exp(au * r), Y[:, 1] * np.exp(av * r), p)


@dataclass(frozen=True)
class RateCheck:
    which: str
    predicted: GrowthDescriptor
    measured: GrowthDescriptor
    measured_exponent: float
    log_correction: bool
    passed: bool


def classify_growth(r, y, dy, window, tolerance: float = 0.1) -> GrowthDescriptor:
    """Growth descriptor of a positive increasing solution from its derivative.

    ``y' ~ e^{w r}`` with ``w > tol`` gives ``e^{w r}`` (times ``r`` when the
    log-corrected model is selected for ``y'``); ``y'`` of exponent ``~0``
    gives ``r`` (``r^2`` if log-corrected); decaying ``y'`` gives ``O(1)``.
    A fit of ``y`` itself cannot separate ``A + C r`` from a constant when
    ``A >> C`` on the window.
    """
    f = fit_decay(r, np.abs(dy), window)
    w, k = f.growth, int(f.log_correction)
    if w > tolerance:
        return GrowthDescriptor(w, k)
    if w >= -tolerance and np.all(dy[(r >= window[0]) & (r <= window[1])] > 0):
        return GrowthDescriptor(0.0, 1 + k)
    return GrowthDescriptor(0.0, 0)


def measure_model_rates(p: ModelParams, trials: int = MIN_TRIALS, seed: int = 0,
                        r_max: float = 35.0, window=(5.0, 35.0), tolerance: float = 0.1):
    """Measure growth of generic ``u`` and ``v`` (fastest over random positive initial data).

    Returns ``{"u": RateCheck, "v": RateCheck}``; a check passes when the
    measured exponent is within ``tolerance`` of the prediction and the
    polynomial factor agrees.
    """
    rng = np.random.default_rng(seed)
    sols = [integrate_model_system(p, *rng.uniform(0.5, 2.0, 2), r_max=r_max)
            for _ in range(max(trials, MIN_TRIALS))]
    out = {}
    for which in ("u", "v"):
        pred = predict_rate(p, which)
        best = None
        for sol in sols:
            du, dv, _, _ = sol.derivatives()
            y, dy = (sol.u, du) if which == "u" else (sol.v, dv)
            g = classify_growth(sol.r, y, dy, window, tolerance)
            fit = fit_decay(sol.r, y, window)
            key = (g.exponent, g.r_power)
            if best is None or key > (best[0].exponent, best[0].r_power):
                best = (g, fit)
        g, fit = best
        ok = abs(fit.growth - pred.exponent) <= tolerance and g.r_power == pred.r_power
        if pred.exponent > 0:
            ok = ok and abs(g.exponent - pred.exponent) <= tolerance
        out[which] = RateCheck(which, pred, g, fit.growth, fit.log_correction, bool(ok))
    return out


# ---------------------------------------------------------------------------
# asymptotically constant coefficient equations


@dataclass(frozen=True)
class AsymptoticEquation:
    """``y'' + (c1 + e^{-a r} b1) y' + (c2 + e^{-a r} b2) y = r^k e^{omega r} b3``.

    ``b1, b2, b3`` are callables of ``r``; ``None`` means "draw a random
    bounded function per trial" (for ``b3`` a random function bounded away
    from zero).  Use ``zero`` to switch a term off.
    """

    c1: float
    c2: float
    a: float = 1.0
    omega: float = -math.inf
    b1: Optional[Callable] = None
    b2: Optional[Callable] = None
    b3: Optional[Callable] = None
    source_rpower: int = 0

    @property
    def roots(self):
        return characteristic_roots(self.c1, self.c2)

    def predicted(self) -> GrowthDescriptor:
        src = ExpPoly(()) if self.omega == -math.inf else _t((1.0, self.omega, self.source_rpower))
        return predict_growth(self.roots, src)


def zero(r):
    return 0.0


def one(r):
    return 1.0


def _random_bounded(rng, positive=False):
    A = rng.uniform(0.5, 1.0) if positive else rng.uniform(-1.0, 1.0)
    B = rng.uniform(-0.4, 0.4) * (abs(A) if positive else 1.0)
    k, ph = rng.uniform(0.5, 2.0), rng.uniform(0, 2 * math.pi)
    return lambda r: A + B * math.sin(k * r + ph)


@dataclass(frozen=True)
class AsymptoticVerdict:
    case: str  # "distinct" or "repeated"
    predicted: GrowthDescriptor
    measured_exponent: float
    measured_power: Optional[float]
    log_correction: Optional[bool]
    quadratic_coefficient: Optional[float]
    trials: int
    passed: bool
    details: dict = field(default_factory=dict, compare=False)


def _solve_equation(eq: AsymptoticEquation, b1, b2, b3, y0, dy0, r_max, step, lam, atol=1e-12):
    """Integrate with ``y = e^{lam r} z`` so the state stays polynomially bounded."""
    c1, c2, a, om, k = eq.c1, eq.c2, eq.a, eq.omega, eq.source_rpower
    count = int(round(r_max / step))
    r_eval = step * np.arange(count + 1)

    def rhs(r, x):
        z, dz = x
        pr = c1 + math.exp(-a * r) * b1(r)
        qr = c2 + math.exp(-a * r) * b2(r)
        src = 0.0 if om == -math.inf else r ** k * math.exp((om - lam) * r) * b3(r)
        d2z = -2 * lam * dz - lam * lam * z - pr * (dz + lam * z) - qr * z + src
        return [dz, d2z]

    r, X = integrate(rhs, (0.0, r_eval[-1]), [y0, dy0 - lam * y0], r_eval, atol=atol,
                     label="asymptotic equation")
    e = np.exp(lam * r)
    return r, X[:, 0] * e, (X[:, 1] + lam * X[:, 0]) * e


def verify_asymptotic_theorem(eq: AsymptoticEquation, trials: int = MIN_TRIALS, seed: int = 0,
                              r_max: float = 30.0, window=(5.0, 30.0), tolerance: float = 0.05,
                              power_tolerance: float = 0.1) -> AsymptoticVerdict:
    """Compare generic solution growth with the distinct/repeated-root predictions.

    Distinct roots: exponential fit with log-correction selection.
    Repeated root 0: power of ``y`` from the log-log slope of ``y'`` (plus
    one), exponential fit when the source grows, and the quadratic
    coefficient of a degree-2 polynomial fit.
    """
    if eq.c1 * eq.c1 - 4 * eq.c2 < 0:
        raise UnsupportedCaseError("complex characteristic roots are out of scope")
    trials = max(int(trials), MIN_TRIALS)
    pred = eq.predicted()
    rng = np.random.default_rng(seed)
    lam = max(pred.exponent, 0.0)
    repeated = abs(eq.roots[1] - eq.roots[0]) < REPEATED_ROOT_GAP
    runs = []
    for _ in range(trials):
        b1 = eq.b1 or _random_bounded(rng)
        b2 = eq.b2 or _random_bounded(rng)
        b3 = eq.b3 or _random_bounded(rng, positive=True)
        y0, dy0 = rng.uniform(0.5, 1.5, 2)
        runs.append(_solve_equation(eq, b1, b2, b3, y0, dy0, r_max, 0.05, lam))

    if not repeated:
        fits = [fit_decay(r, np.abs(y), window) for r, y, _ in runs]
        best = max(fits, key=lambda f: f.growth)
        ok = abs(best.growth - pred.exponent) <= tolerance
        if pred.r_power == 1:
            ok = ok and best.log_correction
        elif pred.r_power > 1:
            ok = False
        return AsymptoticVerdict("distinct", pred, best.growth, None, best.log_correction, None,
                                 trials, bool(ok), {"fits": fits})

    if pred.exponent > 0:
        fits = [fit_decay(r, np.abs(y), window) for r, y, _ in runs]
        best = max(fits, key=lambda f: f.growth)
        ok = abs(best.growth - pred.exponent) <= tolerance
        return AsymptoticVerdict("repeated", pred, best.growth, None, best.log_correction, None,
                                 trials, bool(ok), {"fits": fits})
    late = (0.5 * (window[0] + window[1]), window[1])
    powers = [1.0 + fit_power(r, np.abs(dy), late) for r, _, dy in runs]
    power = max(powers)
    r, y, _ = runs[int(np.argmax(powers))]
    m = (r >= window[0]) & (r <= window[1])
    quad = float(np.polyfit(r[m], y[m], 2)[0])
    ok = abs(power - pred.r_power) <= power_tolerance
    return AsymptoticVerdict("repeated", pred, 0.0, power, None, quad, trials, bool(ok),
                             {"powers": powers})


def wronskian_growth(eq: AsymptoticEquation, r_max: float = 30.0, window=(5.0, 30.0), seed: int = 0):
    """Fitted exponent of the Wronskian of two homogeneous solutions.

    Expected ``mu1 + mu2 = -c1``.
    """
    rng = np.random.default_rng(seed)
    b1 = eq.b1 or _random_bounded(rng)
    b2 = eq.b2 or _random_bounded(rng)
    homog = AsymptoticEquation(eq.c1, eq.c2, eq.a, -math.inf, b1, b2, zero)
    lam = max(eq.roots[1], 0.0)
    # decaying derivatives need relative, not absolute, accuracy
    _, y1, d1 = _solve_equation(homog, b1, b2, zero, 1.0, 0.0, r_max, 0.05, lam, atol=1e-40)
    r, y2, d2 = _solve_equation(homog, b1, b2, zero, 0.0, 1.0, r_max, 0.05, lam, atol=1e-40)
    W = y1 * d2 - y2 * d1
    # W is a difference of products; keep samples where it is resolved
    scale = np.abs(y1 * d2) + np.abs(y2 * d1)
    ok = np.abs(W) > 1e-9 * scale
    hi = min(window[1], float(r[ok][-1]) if ok.any() else window[0])
    lo = min(window[0], 0.5 * hi)
    return fit_decay(r, np.abs(W), (lo, hi), allow_log_correction=False).growth


__all__ = [
    "ExpPoly", "ModelParams", "FirstOrderSystem", "SecondOrderForm", "ModelReduction",
    "GrowthDescriptor", "ModelSolution", "RateCheck", "AsymptoticEquation", "AsymptoticVerdict",
    "model_first_order", "reduce_to_second_order", "characteristic_roots", "predict_growth",
    "predict_rate", "integrate_model_system", "classify_growth", "measure_model_rates", "verify_asymptotic_theorem",
    "wronskian_growth", "zero", "one",
]
