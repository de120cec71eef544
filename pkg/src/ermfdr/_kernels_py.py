"""Pure numpy implementation of the normalization kernels.

Same signatures as the compiled module. Callers guarantee every argument
``-(b + L_i) / lam + shift`` lies inside the base generator's domain.
"""

import math

import numpy as np

from .special import wright_omega

LN2 = math.log(2.0)


def inverse(kind, a):
    """Base inverse derivative evaluated at the already shifted argument ``a``."""
    if kind == 0:
        return np.exp(a)
    if kind == 1:
        return -1.0 / a
    if kind == 2:
        # omega underflows to 0 far in the tail; the density overflows to inf like exp does
        with np.errstate(divide="ignore"):
            return 1.0 / wright_omega(1.0 - a)
    if kind == 3:
        return np.exp(a) / (-2.0 * np.expm1(a - LN2))
    if kind == 4:
        return 1.0 / (1.0 - a) ** 2
    if kind == 5:
        return 0.5 * a
    raise ValueError(f"unknown kernel kind {kind}")


def inv_curvature(kind, g):
    """``1 / f''(g)``, the slope of the inverse derivative at ``fdot(g)``."""
    if kind == 0:
        return g
    if kind == 1:
        return g * g
    if kind == 2:
        return g * g / (g + 1.0)
    if kind == 3:
        return g * (g + 1.0)
    if kind == 4:
        return 2.0 * g ** 1.5
    if kind == 5:
        return np.full_like(g, 0.5)
    raise ValueError(f"unknown kernel kind {kind}")


def rn_values(kind, shift, lam, b, risks):
    a = -(b + np.asarray(risks, dtype=float)) / lam + shift
    with np.errstate(over="ignore"):
        return inverse(kind, a)


def constraint_sum(kind, shift, lam, b, risks, weights):
    return float(np.dot(rn_values(kind, shift, lam, b, risks), weights))


def constraint_sum_and_slope(kind, shift, lam, b, risks, weights):
    """``I(b)`` and ``dI/db = -(1/lam) sum q / f''(g)``."""
    g = rn_values(kind, shift, lam, b, risks)
    return float(np.dot(g, weights)), -float(np.dot(inv_curvature(kind, g), weights)) / lam


def bisect(kind, shift, lam, lo, hi, risks, weights, tol, max_iter):
    """Bisect ``I(b) = 1`` on ``[lo, hi]`` where ``I(lo) >= 1 >= I(hi)``.

    Returns ``(b, I(b), iterations)`` for the best midpoint seen.
    """
    risks = np.asarray(risks, dtype=float)
    weights = np.asarray(weights, dtype=float)
    best_b, best_i = lo, math.inf
    n = 0
    while n < max_iter:
        n += 1
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # bracket collapsed to adjacent floats
            break
        val = constraint_sum(kind, shift, lam, mid, risks, weights)
        if abs(val - 1.0) < abs(best_i - 1.0):
            best_b, best_i = mid, val
        if abs(val - 1.0) <= tol:
            break
        if val > 1.0:
            lo = mid
        else:
            hi = mid
    return best_b, best_i, n
