"""Backend selection for the normalization kernels.

The compiled extension is used when it imports; set ``ERMFDR_PURE_PYTHON=1``
to force the numpy implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ERMFDR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

# numpy's vectorized exp beats the scalar libm loop on large inputs
_EXP_KINDS = (0, 3)
LARGE = 2000


def _pick(kind, risks):
    if _impl is not _kernels_py and kind in _EXP_KINDS and len(risks) > LARGE:
        return _kernels_py
    return _impl


def constraint_sum(kind, shift, lam, b, risks, weights):
    return _pick(kind, risks).constraint_sum(kind, shift, lam, b, risks, weights)


def constraint_sum_and_slope(kind, shift, lam, b, risks, weights):
    return _pick(kind, risks).constraint_sum_and_slope(kind, shift, lam, b, risks, weights)


def bisect(kind, shift, lam, lo, hi, risks, weights, tol, max_iter):
    return _pick(kind, risks).bisect(kind, shift, lam, lo, hi, risks, weights, tol, max_iter)


# per-atom values are always computed with numpy
rn_values = _kernels_py.rn_values
inv_curvature = _kernels_py.inv_curvature

__all__ = ["BACKEND", "bisect", "constraint_sum", "constraint_sum_and_slope", "rn_values"]
