# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled normalization kernels. Mirrors ``_kernels_py``."""

from libc.math cimport exp, expm1, log, sqrt, fabs, INFINITY, isfinite

cdef double LN2 = 0.6931471805599453
cdef double EPS = 2.220446049250313e-16
cdef int MAX_ITER = 64


cdef double _w0_pos(double x) nogil:
    # principal Lambert W for x > 0 by Halley iteration
    cdef double w, ew, r, wp1, dw, wn, l1, l2
    cdef int k
    if x == 0.0:
        return 0.0
    if not isfinite(x):
        return INFINITY
    if x > 2.718281828459045:
        l1 = log(x)
        l2 = log(l1)
        w = l1 - l2 + l2 / l1
    else:
        w = log(1.0 + x)
    for k in range(MAX_ITER):
        ew = exp(w)
        r = w * ew - x
        wp1 = w + 1.0
        dw = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1))
        wn = w - dw
        if wn <= -1.0:
            wn = 0.5 * (w - 1.0)
        if fabs(wn - w) <= 4.0 * EPS * (1.0 + fabs(wn)):
            return wn
        w = wn
    return w


cdef double _omega(double a) nogil:
    cdef double w, dw
    cdef int k
    if a <= 500.0:
        return _w0_pos(exp(a))
    w = a - log(a)
    for k in range(MAX_ITER):
        dw = (w + log(w) - a) / (1.0 + 1.0 / w)
        w = w - dw
        if fabs(dw) <= 4.0 * EPS * fabs(w):
            break
    return w


cdef inline double _inverse(int kind, double a) nogil:
    cdef double t
    if kind == 0:
        return exp(a)
    elif kind == 1:
        return -1.0 / a
    elif kind == 2:
        return 1.0 / _omega(1.0 - a)
    elif kind == 3:
        return exp(a) / (-2.0 * expm1(a - LN2))
    elif kind == 4:
        t = 1.0 - a
        return 1.0 / (t * t)
    else:
        return 0.5 * a


cdef inline double _inv_curvature(int kind, double g) nogil:
    if kind == 0:
        return g
    elif kind == 1:
        return g * g
    elif kind == 2:
        return g * g / (g + 1.0)
    elif kind == 3:
        return g * (g + 1.0)
    elif kind == 4:
        return 2.0 * g * sqrt(g)
    else:
        return 0.5


cdef double _sum(int kind, double shift, double lam, double b,
                 const double[::1] risks, const double[::1] weights) nogil:
    cdef Py_ssize_t i, n = risks.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += weights[i] * _inverse(kind, -(b + risks[i]) / lam + shift)
    return acc


def _check_kind(int kind):
    if kind < 0 or kind > 5:
        raise ValueError(f"unknown kernel kind {kind}")


def constraint_sum(int kind, double shift, double lam, double b, risks, weights):
    _check_kind(kind)
    cdef const double[::1] r = risks
    cdef const double[::1] w = weights
    return _sum(kind, shift, lam, b, r, w)


def constraint_sum_and_slope(int kind, double shift, double lam, double b, risks, weights):
    _check_kind(kind)
    cdef const double[::1] r = risks
    cdef const double[::1] w = weights
    cdef Py_ssize_t i, n = r.shape[0]
    cdef double g, acc = 0.0, slope = 0.0
    with nogil:
        for i in range(n):
            g = _inverse(kind, -(b + r[i]) / lam + shift)
            acc += w[i] * g
            slope += w[i] * _inv_curvature(kind, g)
    return acc, -slope / lam


def bisect(int kind, double shift, double lam, double lo, double hi,
           risks, weights, double tol, int max_iter):
    _check_kind(kind)
    cdef const double[::1] r = risks
    cdef const double[::1] w = weights
    cdef double mid, val, best_b = lo, best_i = INFINITY
    cdef int n = 0
    with nogil:
        while n < max_iter:
            n += 1
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            val = _sum(kind, shift, lam, mid, r, w)
            if fabs(val - 1.0) < fabs(best_i - 1.0):
                best_b = mid
                best_i = val
            if fabs(val - 1.0) <= tol:
                break
            if val > 1.0:
                lo = mid
            else:
                hi = mid
    return best_b, best_i, n
