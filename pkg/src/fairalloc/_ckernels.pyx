# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled curve kernels. Same contracts as ``_pykernels``."""
from libc.math cimport INFINITY


cdef inline Py_ssize_t _first_geq(const double[::1] a, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _first_gt(const double[::1] a, double x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def tp_at(const double[::1] vd, const double[::1] cw, const double[::1] cm, double c):
    cdef Py_ssize_t n = vd.shape[0], k
    if c <= 0.0:
        return 0.0
    if c >= 1.0:
        c = 1.0
    k = _first_geq(cw, c)
    if k > n - 1:
        k = n - 1
    if k == 0:
        return c * vd[0]
    return cm[k - 1] + (c - cw[k - 1]) * vd[k]


def threshold_at(const double[::1] vd, const double[::1] cw, double c):
    cdef Py_ssize_t n = vd.shape[0], k
    cdef double above, w, gamma
    if c <= 0.0:
        return vd[0], 0.0
    k = _first_gt(cw, c)
    if k > n - 1:
        k = n - 1
    above = cw[k - 1] if k > 0 else 0.0
    w = cw[k] - above
    gamma = (c - above) / w if w > 0.0 else 0.0
    if gamma < 0.0:
        gamma = 0.0
    elif gamma > 1.0:
        gamma = 1.0
    return vd[k], gamma


def capacity_for_tp(const double[::1] vd, const double[::1] cw, const double[::1] cm, double h):
    cdef Py_ssize_t k
    cdef double prev_w, prev_m, c
    if h <= 0.0:
        return 0.0
    k = _first_geq(cm, h)
    if k >= vd.shape[0]:
        return INFINITY
    prev_w = cw[k - 1] if k > 0 else 0.0
    prev_m = cm[k - 1] if k > 0 else 0.0
    c = prev_w + (h - prev_m) / vd[k]
    return c if c < cw[k] else cw[k]


def capacity_for_ratio(const double[::1] vd, const double[::1] cw, const double[::1] cm, double lam):
    cdef Py_ssize_t lo = 0, hi = vd.shape[0] - 1, mid, k
    cdef double prev_w, prev_m, c
    while lo < hi:
        mid = (lo + hi + 1) >> 1
        if vd[mid] >= lam * cm[mid - 1]:
            lo = mid
        else:
            hi = mid - 1
    k = lo
    prev_w = cw[k - 1] if k > 0 else 0.0
    prev_m = cm[k - 1] if k > 0 else 0.0
    if vd[k] <= 0.0:
        return prev_w
    c = prev_w + 1.0 / lam - prev_m / vd[k]
    if c < prev_w:
        c = prev_w
    return c if c < cw[k] else cw[k]


def marginal_score(const double[::1] vd, const double[::1] cw, double c):
    cdef Py_ssize_t k
    if c <= 0.0:
        return vd[0]
    k = _first_geq(cw, c)
    if k > vd.shape[0] - 1:
        k = vd.shape[0] - 1
    return vd[k]
