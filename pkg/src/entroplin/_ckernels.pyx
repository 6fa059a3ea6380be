# cython: language_level=3
"""Compiled pairwise kernel sums.

Every routine sums over rows ``start <= i < stop`` of the first argument so
callers can partition the work into fixed row blocks and reduce the partial
sums in block order. Accumulation is Neumaier-compensated.
"""

from libc.math cimport exp, fabs, sqrt, M_PI

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef enum:
    GAUSSIAN = 0
    EPANECHNIKOV = 1

cdef double INV_SQRT_2PI = 1.0 / sqrt(2.0 * M_PI)


cdef inline double _kernel(int kind, double u) noexcept nogil:
    if kind == GAUSSIAN:
        return INV_SQRT_2PI * exp(-0.5 * u * u)
    if fabs(u) <= 1.0:
        return 0.75 * (1.0 - u * u)
    return 0.0


cdef inline void _add(double* s, double* c, double v) noexcept nogil:
    cdef double t = s[0] + v
    if fabs(s[0]) >= fabs(v):
        c[0] += (s[0] - t) + v
    else:
        c[0] += (v - t) + s[0]
    s[0] = t


def pair_sum(const double[::1] x, int kind, double h, Py_ssize_t start, Py_ssize_t stop):
    """Sum of K((x_i - x_j)/h) over start <= i < stop, i < j < n."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double s = 0.0, c = 0.0, xi, inv_h = 1.0 / h
    with nogil:
        for i in range(start, stop):
            xi = x[i]
            for j in range(i + 1, n):
                _add(&s, &c, _kernel(kind, (xi - x[j]) * inv_h))
    return s + c


def pair_sum_window(const double[::1] x, int kind, double h, double width,
                    Py_ssize_t start, Py_ssize_t stop):
    """Windowed pair sum over a sorted array; pairs with gap > width*h are skipped."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j
    cdef double s = 0.0, c = 0.0, xi, u, inv_h = 1.0 / h
    with nogil:
        for i in range(start, stop):
            xi = x[i]
            for j in range(i + 1, n):
                u = (x[j] - xi) * inv_h
                if u > width:
                    break
                _add(&s, &c, _kernel(kind, u))
    return s + c


def cross_sum(const double[::1] x, const double[::1] y, int kind, double h,
              Py_ssize_t start, Py_ssize_t stop):
    """Sum of K((x_i - y_j)/h) over start <= i < stop and all j."""
    cdef Py_ssize_t m = y.shape[0]
    cdef Py_ssize_t i, j
    cdef double s = 0.0, c = 0.0, xi, inv_h = 1.0 / h
    with nogil:
        for i in range(start, stop):
            xi = x[i]
            for j in range(m):
                _add(&s, &c, _kernel(kind, (xi - y[j]) * inv_h))
    return s + c


def cross_sum_window(const double[::1] x, const double[::1] y, int kind, double h,
                     double width, Py_ssize_t start, Py_ssize_t stop):
    """Windowed cross sum; both arrays sorted ascending."""
    cdef Py_ssize_t m = y.shape[0]
    cdef Py_ssize_t i, j, lo = 0
    cdef double s = 0.0, c = 0.0, xi, u, inv_h = 1.0 / h
    with nogil:
        for i in range(start, stop):
            xi = x[i]
            # x is sorted, so the left edge of the window only moves right
            while lo < m and (xi - y[lo]) * inv_h > width:
                lo += 1
            for j in range(lo, m):
                u = (y[j] - xi) * inv_h
                if u > width:
                    break
                _add(&s, &c, _kernel(kind, u))
    return s + c
