"""Central finite-difference stencils on uniform tensor-product blocks.

Block arrays store spatial axes first and tensor components last.  Every
operator returns values on the interior obtained by trimming ``margin``
nodes from both ends of every spatial axis, so results from stencils of
different width can be combined directly.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError


@lru_cache(maxsize=None)
def central_weights(deriv: int, order: int) -> tuple[float, ...]:
    """Weights on offsets ``-w..w`` of the central stencil for ``d^deriv``.

    ``order`` must be even; the half-width is ``order // 2`` (``deriv`` 1 or 2).
    """
    if deriv not in (1, 2) or order < 2 or order % 2:
        raise ConfigurationError(f"unsupported stencil (deriv={deriv}, order={order})")
    w = order // 2
    k = np.arange(-w, w + 1, dtype=float)
    A = np.array([k ** i / math.factorial(i) for i in range(2 * w + 1)])
    rhs = np.zeros(2 * w + 1)
    rhs[deriv] = 1.0
    return tuple(np.linalg.solve(A, rhs))


def half_width(order: int) -> int:
    return order // 2


def _view(f, nsp: int, margin: int, offsets: dict[int, int]):
    sl = []
    for ax in range(nsp):
        m = f.shape[ax]
        k = offsets.get(ax, 0)
        sl.append(slice(margin + k, m - margin + k))
    return f[tuple(sl)]


def diff1(f, axis: int, h: float, order: int, margin: int, nsp: int):
    w = central_weights(1, order)
    hw = len(w) // 2
    out = 0.0
    for k, c in zip(range(-hw, hw + 1), w):
        if c != 0.0:
            out = out + c * _view(f, nsp, margin, {axis: k})
    return out / h


def diff2(f, ax1: int, ax2: int, h1: float, h2: float, order: int, margin: int, nsp: int):
    """Second derivative; mixed derivatives use the product of first-derivative stencils."""
    if ax1 == ax2:
        w = central_weights(2, order)
        hw = len(w) // 2
        out = 0.0
        for k, c in zip(range(-hw, hw + 1), w):
            if c != 0.0:
                out = out + c * _view(f, nsp, margin, {ax1: k})
        return out / (h1 * h1)
    w = central_weights(1, order)
    hw = len(w) // 2
    out = 0.0
    for k1, c1 in zip(range(-hw, hw + 1), w):
        if c1 == 0.0:
            continue
        for k2, c2 in zip(range(-hw, hw + 1), w):
            if c2 != 0.0:
                out = out + (c1 * c2) * _view(f, nsp, margin, {ax1: k1, ax2: k2})
    return out / (h1 * h2)


def gradient(f, h, order: int, margin: int, nsp: int):
    """Stack ``[d_0 f, ..., d_{nsp-1} f]`` on the trimmed interior.

    The derivative index is placed right after the spatial axes.
    """
    parts = [diff1(f, ax, h[ax], order, margin, nsp) for ax in range(nsp)]
    return np.stack(parts, axis=nsp)


def hessian(f, h, order: int, margin: int, nsp: int):
    """Symmetric stack ``d_a d_b f`` with both derivative indices after the spatial axes."""
    shape = None
    out = None
    for a in range(nsp):
        for b in range(a, nsp):
            d = diff2(f, a, b, h[a], h[b], order, margin, nsp)
            if out is None:
                shape = d.shape[:nsp] + (nsp, nsp) + d.shape[nsp:]
                out = np.empty(shape)
            out[(slice(None),) * nsp + (a, b)] = d
            out[(slice(None),) * nsp + (b, a)] = d
    return out


def trim(f, margin: int, nsp: int):
    return _view(f, nsp, margin, {})
