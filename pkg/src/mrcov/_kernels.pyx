# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a drop-in twin in ``_pure.py`` with the same
signature and output; ``_backend.py`` picks one at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp
from scipy.linalg.cython_blas cimport ddot

cnp.import_array()


def refresh_scan(const double[::1] times, const cnp.int64_t[::1] offsets):
    """Refresh grid and next-tick indices for concatenated tick times.

    ``times[offsets[k]:offsets[k + 1]]`` holds the ticks of asset ``k``.
    Returns ``(grid, idx)`` with ``idx[k, p]`` the local index of the
    tick of asset ``k`` interpolated into cell ``p``.
    """
    cdef Py_ssize_t d = offsets.shape[0] - 1
    cdef Py_ssize_t k, p, cap, length
    cdef double T, t, newT
    cap = times.shape[0]
    for k in range(d):
        length = offsets[k + 1] - offsets[k]
        if length < cap:
            cap = length
    grid_arr = np.empty(cap, dtype=np.float64)
    idx_arr = np.zeros((d, cap), dtype=np.int64)
    cdef double[::1] grid = grid_arr
    cdef cnp.int64_t[:, ::1] idx = idx_arr
    pos_arr = np.zeros(d, dtype=np.int64)
    cdef cnp.int64_t[::1] pos = pos_arr

    T = times[offsets[0]]
    for k in range(1, d):
        t = times[offsets[k]]
        if t > T:
            T = t
    grid[0] = T
    p = 1
    while p < cap:
        newT = T
        for k in range(d):
            length = offsets[k + 1] - offsets[k]
            while pos[k] < length and times[offsets[k] + pos[k]] <= T:
                pos[k] += 1
            if pos[k] == length:
                return grid_arr[:p], idx_arr[:, :p]
            t = times[offsets[k] + pos[k]]
            if k == 0 or t > newT:
                newT = t
        for k in range(d):
            idx[k, p] = pos[k]
        grid[p] = newT
        T = newT
        p += 1
    return grid_arr[:p], idx_arr[:, :p]


def hitting_scan(const double[::1] path, const double[::1] var_step,
                 double lower, double upper, const double[::1] uniforms,
                 bint bridge):
    """First exits of ``path - path[start]`` from ``(-lower, upper)``.

    With ``bridge`` the Brownian-bridge crossing probability between two
    grid points is tested against ``uniforms[j]``; the hit is then dated
    at the right end of the step.
    """
    cdef Py_ssize_t m = path.shape[0]
    cdef Py_ssize_t j, count = 0
    cdef double ref = path[0]
    cdef double x0, x1, v, pd, pu
    cdef signed char sgn
    hits_arr = np.empty(m, dtype=np.int64)
    signs_arr = np.empty(m, dtype=np.int8)
    cdef cnp.int64_t[::1] hits = hits_arr
    cdef signed char[::1] signs = signs_arr
    for j in range(m - 1):
        x1 = path[j + 1] - ref
        sgn = 0
        if x1 <= -lower:
            sgn = -1
        elif x1 >= upper:
            sgn = 1
        elif bridge:
            v = var_step[j]
            if v > 0.0:
                x0 = path[j] - ref
                pd = exp(-2.0 * (x0 + lower) * (x1 + lower) / v)
                pu = exp(-2.0 * (upper - x0) * (upper - x1) / v)
                if uniforms[j] < pd:
                    sgn = -1
                elif uniforms[j] < pd + pu:
                    sgn = 1
        if sgn != 0:
            hits[count] = j + 1
            signs[count] = sgn
            count += 1
            ref = path[j + 1]
    return hits_arr[:count], signs_arr[:count]


def exp_two_sided(const double[:, ::1] x, double decay):
    """``sum_p decay**|p - i| * x[p]`` for every ``i``, column by column, in O(L)."""
    cdef Py_ssize_t L = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, c
    cdef double acc
    out_arr = np.empty((L, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for c in range(d):
        acc = 0.0
        for i in range(L):
            acc = decay * acc + x[i, c]
            out[i, c] = acc - x[i, c]
        acc = 0.0
        for i in range(L - 1, -1, -1):
            acc = decay * acc + x[i, c]
            out[i, c] += acc
    return out_arr


def window_sum(const double[:, ::1] x, const double[::1] w,
               Py_ssize_t shift, Py_ssize_t n_out):
    """``out[i] = sum_j w[j] * x[i + shift + j]`` with out-of-range terms dropped."""
    cdef Py_ssize_t L = x.shape[0], d = x.shape[1], m = w.shape[0]
    cdef Py_ssize_t i, c, s, j0, j1
    cdef int cnt, one = 1
    out_arr = np.zeros((n_out, d), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    col_arr = np.empty(L, dtype=np.float64)
    cdef double[::1] col = col_arr
    if L == 0 or m == 0:
        return out_arr
    for c in range(d):
        for i in range(L):
            col[i] = x[i, c]
        for i in range(n_out):
            s = i + shift
            j0 = 0 if s >= 0 else -s
            j1 = m if s + m <= L else L - s
            if j1 > j0:
                cnt = <int>(j1 - j0)
                out[i, c] = ddot(&cnt, <double*>&w[j0], &one, &col[s + j0], &one)
    return out_arr


def tridiagonal_solve(const double[::1] sub, const double[::1] diag,
                      const double[::1] sup, const double[::1] rhs):
    """Thomas algorithm; ``sub[i]`` couples rows ``i + 1`` and ``i``."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double denom
    c_arr = np.empty(n, dtype=np.float64)
    x_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] c = c_arr
    cdef double[::1] x = x_arr
    if diag[0] == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    c[0] = sup[0] / diag[0] if n > 1 else 0.0
    x[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - sub[i - 1] * c[i - 1]
        if denom == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        c[i] = sup[i] / denom if i < n - 1 else 0.0
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - c[i] * x[i + 1]
    return x_arr
