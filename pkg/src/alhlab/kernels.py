"""Kernel dispatch: compiled extension when available, NumPy otherwise.

Set ``ALHLAB_PURE_PYTHON=1`` to force the NumPy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ALHLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

riemann_lower = _impl.riemann_lower
b_tensor = _impl.b_tensor
pair_modulus = _impl.pair_modulus

__all__ = ["BACKEND", "riemann_lower", "b_tensor", "pair_modulus"]
