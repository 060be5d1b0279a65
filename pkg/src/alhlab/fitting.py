"""Log-linear decay-rate regression with log-correction model selection.

Two models are fitted by least squares on ``log(value)``::

    pure       value = C exp(-b r)
    corrected  value = C (r + 1) exp(-b r)

and the one with the smaller small-sample corrected AIC is kept.  The decay
exponent ``b`` is positive for decaying data and negative for growth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, DomainError, FitWindowError

MIN_SAMPLES = 10
ZERO_FLOOR = 1e-300


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_correction: bool
    constant: float
    window: tuple[float, float]
    rms_residual: float
    model_selection_score: float
    n_samples: int = 0

    @property
    def growth(self) -> float:
        """Growth exponent, i.e. ``-exponent``."""
        return -self.exponent

    @property
    def is_zero(self) -> bool:
        return math.isinf(self.exponent)

    def predict(self, r):
        r = np.asarray(r, dtype=float)
        k = 1.0 if self.log_correction else 0.0
        return self.constant * (r + 1.0) ** k * np.exp(-self.exponent * r)


def _aicc(rss: float, n: int, k: int) -> float:
    rss = max(rss, n * 1e-30)
    return n * math.log(rss / n) + 2 * k + 2 * k * (k + 1) / (n - k - 1)


def _linfit(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < 2:
        raise DegenerateDataError("singular design matrix: window has a single r value")
    resid = y - A @ coef
    return coef, float(resid @ resid)


def select_window(r, values, window=None):
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if r.shape != values.shape or r.ndim != 1:
        raise DomainError("r and values must be 1-D arrays of equal length")
    lo, hi = (-math.inf, math.inf) if window is None else window
    lo = -math.inf if lo is None else lo
    hi = math.inf if hi is None else hi
    mask = (r >= lo - 1e-12) & (r <= hi + 1e-12)
    return r[mask], values[mask]


def fit_decay(r, values, window=None, *, allow_log_correction: bool = True) -> DecayFit:
    """Fit ``values ~ C (r+1)^k exp(-b r)`` with ``k`` in {0, 1}.

    Parameters
    ----------
    r, values : array_like
        Samples; ``values`` must be positive inside the window.
    window : (lo, hi), optional
        Closed r-interval to fit on.  ``None`` entries are open ends.
    allow_log_correction : bool
        If False only the pure exponential is fitted.

    Returns
    -------
    DecayFit
        ``exponent`` is ``+inf`` when every sample in the window is below
        ``1e-300`` (identically zero data).
    """
    rw, vw = select_window(r, values, window)
    n = rw.size
    if n < MIN_SAMPLES:
        raise FitWindowError(f"fit window holds {n} samples, need at least {MIN_SAMPLES}")
    if not np.all(np.isfinite(vw)):
        raise DomainError("non-finite samples in fit window")
    span = (float(rw[0]), float(rw[-1]))
    if np.all(np.abs(vw) < ZERO_FLOOR):
        return DecayFit(math.inf, False, 0.0, span, 0.0, 0.0, n)
    if np.any(vw <= 0):
        raise DomainError("nonpositive samples in fit window")

    logv = np.log(vw)
    coef0, rss0 = _linfit(rw, logv)
    aic0 = _aicc(rss0, n, 2)
    best = (coef0, rss0, False)
    score = 0.0
    if allow_log_correction:
        coef1, rss1 = _linfit(rw, logv - np.log(rw + 1.0))
        aic1 = _aicc(rss1, n, 2)
        score = aic0 - aic1
        if aic1 < aic0:
            best = (coef1, rss1, True)
    coef, rss, corrected = best
    return DecayFit(
        exponent=float(-coef[1]),
        log_correction=corrected,
        constant=float(math.exp(coef[0])),
        window=span,
        rms_residual=math.sqrt(rss / n),
        model_selection_score=float(score),
        n_samples=n,
    )


def fit_power(r, values, window=None) -> float:
    """Slope of ``log|values|`` against ``log r``: the polynomial growth power."""
    rw, vw = select_window(r, values, window)
    if rw.size < MIN_SAMPLES:
        raise FitWindowError(f"fit window holds {rw.size} samples, need at least {MIN_SAMPLES}")
    if np.any(rw <= 0) or np.any(vw == 0):
        raise DomainError("power fit needs r > 0 and nonzero values")
    coef, _ = _linfit(np.log(rw), np.log(np.abs(vw)))
    return float(coef[1])


def running_max(r, values, half_width: float):
    """Upper envelope ``max{values(s) : |s - r| <= half_width}``.

    Used before fitting rates of oscillatory norms, whose zeros would
    otherwise dominate a log-linear regression.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(values, dtype=float)
    out = np.empty_like(v)
    lo = np.searchsorted(r, r - half_width - 1e-12, side="left")
    hi = np.searchsorted(r, r + half_width + 1e-12, side="right")
    for i in range(r.size):
        out[i] = v[lo[i]:hi[i]].max()
    return out
