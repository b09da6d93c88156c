# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the dual descent inner loop.

One fused pass over the grid computes the dual functional value and its
subgradient; this is what the subgradient solver calls tens of thousands
of times. Reductions use a fixed pairwise tree over row partials so the
result is deterministic for a given input.
"""

import numpy as np

BACKEND_NAME = "compiled"


cdef double _pairwise(const double[::1] buf, Py_ssize_t lo, Py_ssize_t hi):
    cdef double acc = 0.0
    cdef Py_ssize_t k, mid
    if hi - lo <= 8:
        for k in range(lo, hi):
            acc += buf[k]
        return acc
    mid = lo + (hi - lo) // 2
    return _pairwise(buf, lo, mid) + _pairwise(buf, mid, hi)


cdef double _weighted_mean(const double[::1] a, const double[::1] dens,
                           const double[::1] w):
    cdef Py_ssize_t k
    cdef double acc = 0.0
    for k in range(a.shape[0]):
        acc += a[k] * dens[k] * w[k]
    return acc


def eval_dual(const double[:, ::1] s, const double[:, ::1] hbar,
              const double[::1] wx, const double[::1] wy,
              const double[::1] f, const double[::1] g,
              const double[::1] u, const double[::1] v):
    cdef Py_ssize_t m = s.shape[0], n = s.shape[1]
    cdef Py_ssize_t i, j
    cdef double sig, acc
    rows_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] rows = rows_arr
    for i in range(m):
        acc = 0.0
        for j in range(n):
            sig = s[i, j] + u[i] + v[j]
            if sig > 0.0:
                acc += sig * hbar[i, j] * wy[j]
        rows[i] = acc * wx[i]
    return _pairwise(rows, 0, m) - _weighted_mean(u, f, wx) - _weighted_mean(v, g, wy)


def eval_dual_with_subgrad(const double[:, ::1] s, const double[:, ::1] hbar,
                           const double[::1] wx, const double[::1] wy,
                           const double[::1] f, const double[::1] g,
                           const double[::1] u, const double[::1] v,
                           double[::1] du, double[::1] dv):
    cdef Py_ssize_t m = s.shape[0], n = s.shape[1]
    cdef Py_ssize_t i, j
    cdef double sig, acc, act, ui
    rows_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] rows = rows_arr
    for j in range(n):
        dv[j] = 0.0
    for i in range(m):
        acc = 0.0
        act = 0.0
        ui = u[i]
        for j in range(n):
            sig = s[i, j] + ui + v[j]
            if sig > 0.0:
                acc += sig * hbar[i, j] * wy[j]
                act += hbar[i, j] * wy[j]
                dv[j] += hbar[i, j] * wx[i]
        rows[i] = acc * wx[i]
        du[i] = wx[i] * (act - f[i])
    for j in range(n):
        dv[j] = wy[j] * (dv[j] - g[j])
    return _pairwise(rows, 0, m) - _weighted_mean(u, f, wx) - _weighted_mean(v, g, wy)
