# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels (see _py.py for reference)."""

import numpy as np

cimport numpy as cnp


def design_matrix(points, exponents):
    """Evaluate monomials prod_i y_i^(e_i) at each point; (J, R) float64."""
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.int64_t[:, ::1] exps = np.ascontiguousarray(exponents, dtype=np.int64)
    cdef Py_ssize_t n_pts = pts.shape[0]
    cdef Py_ssize_t n_dim = pts.shape[1]
    cdef Py_ssize_t n_terms = exps.shape[0]
    out = np.empty((n_pts, n_terms), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t j, r, i
    cdef cnp.int64_t e, t
    cdef double acc
    for j in range(n_pts):
        for r in range(n_terms):
            acc = 1.0
            for i in range(n_dim):
                e = exps[r, i]
                for t in range(e):
                    acc *= pts[j, i]
            o[j, r] = acc
    return out


def systematic_resample_indices(weights, double offset):
    """Systematic resampling ancestor indices; matches _py semantics."""
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    cdef Py_ssize_t i = 0, j
    cdef double cum = w[0]
    cdef double pos
    for j in range(n):
        pos = (j + offset) / n
        while cum <= pos and i < n - 1:
            i += 1
            cum += w[i]
        o[j] = i
    return out
