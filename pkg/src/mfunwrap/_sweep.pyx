# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mean-field sweep. Same contract as ``_sweep_py.sweep_inplace``."""
from libc.math cimport exp

cdef double PROB_FLOOR = 1e-12


cdef inline double _mean(double[:, :, ::1] p, Py_ssize_t i, Py_ssize_t j) nogil:
    return p[i, j, 2] - p[i, j, 0]


cdef inline void _store(double[:, :, ::1] p, Py_ssize_t i, Py_ssize_t j,
                        double d, double lin, double quad, double w) nogil:
    cdef double c_m = w * (d + 1.0) * (d + 1.0) + quad - lin
    cdef double c_0 = w * d * d
    cdef double c_p = w * (d - 1.0) * (d - 1.0) + quad + lin
    cdef double lo = c_m
    if c_0 < lo:
        lo = c_0
    if c_p < lo:
        lo = c_p
    cdef double e_m = exp(lo - c_m)
    cdef double e_0 = exp(lo - c_0)
    cdef double e_p = exp(lo - c_p)
    cdef double s = e_m + e_0 + e_p
    cdef double mix = 1.0 - 3.0 * PROB_FLOOR
    p[i, j, 0] = PROB_FLOOR + mix * e_m / s
    p[i, j, 1] = PROB_FLOOR + mix * e_0 / s
    p[i, j, 2] = PROB_FLOOR + mix * e_p / s


def sweep_inplace(double[:, ::1] dx, double[:, ::1] dy,
                  double[:, :, ::1] alpha, double[:, :, ::1] beta,
                  double inv_temp, double data_weight, long[::1] order):
    cdef Py_ssize_t rows = alpha.shape[0]
    cdef Py_ssize_t ncols_a = alpha.shape[1]
    cdef Py_ssize_t ncols_b = beta.shape[1]
    cdef Py_ssize_t n_a = rows * ncols_a
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t t, e, i, j
    cdef double lin, quad, rest
    with nogil:
        for t in range(n):
            e = order[t]
            lin = 0.0
            quad = 0.0
            if e < n_a:
                i = e // ncols_a
                j = e - i * ncols_a
                if i < rows - 1:
                    rest = _mean(beta, i, j + 1) - _mean(alpha, i + 1, j) - _mean(beta, i, j)
                    lin = lin + 2.0 * rest
                    quad = quad + 1.0
                if i > 0:
                    rest = _mean(alpha, i - 1, j) + _mean(beta, i - 1, j + 1) - _mean(beta, i - 1, j)
                    lin = lin - 2.0 * rest
                    quad = quad + 1.0
                _store(alpha, i, j, dx[i, j], lin * inv_temp, quad * inv_temp, data_weight)
            else:
                e = e - n_a
                i = e // ncols_b
                j = e - i * ncols_b
                if j < ncols_b - 1:
                    rest = _mean(alpha, i, j) + _mean(beta, i, j + 1) - _mean(alpha, i + 1, j)
                    lin = lin - 2.0 * rest
                    quad = quad + 1.0
                if j > 0:
                    rest = _mean(alpha, i, j - 1) - _mean(alpha, i + 1, j - 1) - _mean(beta, i, j - 1)
                    lin = lin + 2.0 * rest
                    quad = quad + 1.0
                _store(beta, i, j, dy[i, j], lin * inv_temp, quad * inv_temp, data_weight)
