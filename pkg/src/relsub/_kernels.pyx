# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the sampling estimators."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()


def epi_quotient_blocks(const double[:, ::1] dx, const double[::1] dr,
                        const long long[::1] starts, const double[:, ::1] xs):
    """Blockwise max of ``(<x*, dx> - dr) / |(dx, dr)|`` for every row of ``xs``."""
    cdef Py_ssize_t n = dx.shape[0], d = dx.shape[1]
    cdef Py_ssize_t m = xs.shape[0], nb = starts.shape[0] - 1
    cdef Py_ssize_t i, j, k, b
    cdef double acc, best, q
    out = np.full((m, nb), -np.inf)
    cdef double[:, ::1] res = out
    inv = np.empty(n)
    cdef double[::1] inv_norm = inv
    for i in range(n):
        acc = dr[i] * dr[i]
        for k in range(d):
            acc += dx[i, k] * dx[i, k]
        inv_norm[i] = 1.0 / sqrt(acc)
    for j in range(m):
        for b in range(nb):
            best = -INFINITY
            for i in range(starts[b], starts[b + 1]):
                acc = -dr[i]
                for k in range(d):
                    acc += xs[j, k] * dx[i, k]
                q = acc * inv_norm[i]
                if q > best:
                    best = q
            res[j, b] = best
    return out


def pairwise_lipschitz(const double[:, ::1] X, const double[::1] F):
    """Largest ``|F_i - F_j| / |X_i - X_j|`` over distinct points."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double best = 0.0, dist2, t, q
    for i in range(n):
        for j in range(i + 1, n):
            dist2 = 0.0
            for k in range(d):
                t = X[i, k] - X[j, k]
                dist2 += t * t
            if dist2 > 0.0:
                q = fabs(F[i] - F[j]) / sqrt(dist2)
                if q > best:
                    best = q
    return best
