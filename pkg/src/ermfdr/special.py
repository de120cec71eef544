"""Principal-branch Lambert W and the Wright omega function.

Both use Halley's iteration with a bounded iteration count. The scalar paths
use ``math``; array inputs are handled with masked numpy iterations.
"""

import math

import numpy as np

from .errors import DomainError

_INV_E = math.exp(-1.0)
MAX_ITER = 64
_EPS = np.finfo(float).eps
# exp(a) overflows beyond this; switch to the log-space omega iteration
_OMEGA_SWITCH = 500.0


def _w0_seed(x):
    if x > math.e:
        l1 = math.log(x)
        l2 = math.log(l1)
        return l1 - l2 + l2 / l1
    if x >= 0.0:
        return math.log1p(x)
    if x < -0.25:
        # series about the branch point -1/e
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    return math.log1p(x)


def _w0_scalar(x):
    if x < -_INV_E:
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    if x == -_INV_E:
        return -1.0
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    w = _w0_seed(x)
    for _ in range(MAX_ITER):
        ew = math.exp(w)
        r = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1))
        w_new = w - dw
        if w_new <= -1.0:
            # damp: never step across the branch point
            w_new = 0.5 * (w - 1.0)
        if abs(w_new - w) <= 4.0 * _EPS * (1.0 + abs(w_new)):
            return w_new
        w = w_new
    return w


def _w0_array(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < -_INV_E):
        bad = int(np.flatnonzero(x < -_INV_E)[0])
        raise DomainError(f"lambert_w0 requires x >= -1/e, got {x.flat[bad]!r}")
    w = np.where(x >= 0.0, np.log1p(np.maximum(x, 0.0)), 0.0)
    large = (x > math.e) & np.isfinite(x)
    if np.any(large):
        l1 = np.log(x[large])
        l2 = np.log(l1)
        w[large] = l1 - l2 + l2 / l1
    near = x < -0.25
    if np.any(near):
        p = np.sqrt(np.maximum(2.0 * (math.e * x[near] + 1.0), 0.0))
        w[near] = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    mid = (x < 0.0) & ~near
    w[mid] = np.log1p(x[mid])
    active = np.isfinite(x) & (x != 0.0) & (x != -_INV_E)
    w[x == -_INV_E] = -1.0
    w[np.isposinf(x)] = np.inf
    for _ in range(MAX_ITER):
        if not np.any(active):
            break
        wa = w[active]
        xa = x[active]
        ew = np.exp(wa)
        r = wa * ew - xa
        wp1 = wa + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            dw = r / (ew * wp1 - (wa + 2.0) * r / (2.0 * wp1))
        dw = np.where(wp1 == 0.0, 0.0, dw)
        w_new = wa - dw
        w_new = np.where(w_new <= -1.0, 0.5 * (wa - 1.0), w_new)
        done = np.abs(w_new - wa) <= 4.0 * _EPS * (1.0 + np.abs(w_new))
        w[active] = w_new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    return w


def lambert_w0(x):
    """Principal branch ``W0`` of the Lambert function, ``w * exp(w) = x``.

    Accepts a scalar or an array. Raises ``DomainError`` for ``x < -1/e``.
    """
    if np.ndim(x) == 0:
        return _w0_scalar(float(x))
    return _w0_array(x)


def _omega_large(a):
    # Newton on w + log(w) = a; a > 500 so w > 490 and the iteration is benign
    w = a - np.log(a)
    for _ in range(MAX_ITER):
        dw = (w + np.log(w) - a) / (1.0 + 1.0 / w)
        w = w - dw
        if np.all(np.abs(dw) <= 4.0 * _EPS * np.abs(w)):
            break
    return w


def wright_omega(a):
    """``W0(exp(a))`` without overflowing for large ``a``."""
    if np.ndim(a) == 0:
        a = float(a)
        if a > _OMEGA_SWITCH:
            return float(_omega_large(np.float64(a)))
        return _w0_scalar(math.exp(a))
    a = np.asarray(a, dtype=float)
    out = np.empty_like(a)
    big = a > _OMEGA_SWITCH
    out[~big] = _w0_array(np.exp(a[~big]))
    if np.any(big):
        out[big] = _omega_large(a[big])
    return out
