# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: all-node fractional convolutions on uniform grids.

Mirrors the contracts of ``_kernels_py``.  The product-trapezoid sum is
rearranged into a single-kernel correlation

    W_k = g[0] a[k] + g[k] b[1] + sum_{i=1..k-1} g[i] (a[k-i] + b[k-i+1])

so the O(n^2) accumulation is one fused multiply-add stream per node.
"""

from libc.math cimport pow, lgamma, exp

import numpy as np
cimport numpy as cnp

cnp.import_array()


def rl_all_nodes(g, double beta, double h):
    """Product-trapezoid Riemann-Liouville integral at every node, W[0] = 0."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] garr = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n = garr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n + 1, dtype=np.float64)
    if n < 1:
        return out
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] b = np.empty(n + 2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] gv = garr
    cdef double[::1] av = a
    cdef double[::1] bv = b
    cdef double[::1] cv = c
    cdef double[::1] ov = out
    cdef Py_ssize_t d, k, i
    cdef double m0, m1, dd, hb, hb1, inv_gamma, acc
    hb = pow(h, beta)
    hb1 = pow(h, beta + 1.0)
    inv_gamma = exp(-lgamma(beta))
    with nogil:
        av[0] = 0.0
        bv[0] = 0.0
        for d in range(1, n + 2):
            dd = <double> d
            m0 = hb * (pow(dd, beta) - pow(dd - 1.0, beta)) / beta
            m1 = hb1 * (pow(dd, beta + 1.0) - pow(dd - 1.0, beta + 1.0)) / (beta + 1.0)
            if d <= n:
                av[d] = (m1 - (dd - 1.0) * h * m0) / h
            bv[d] = (dd * h * m0 - m1) / h
        cv[0] = 0.0
        for d in range(1, n + 1):
            cv[d] = av[d] + bv[d + 1]
        for k in range(1, n + 1):
            acc = gv[0] * av[k] + gv[k] * bv[1]
            for i in range(1, k):
                acc += gv[i] * cv[k - i]
            ov[k] = acc * inv_gamma
    return out


def l1_all_nodes(g, double alpha, double h):
    """L1-scheme Caputo derivative at every node, D[0] = 0."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] garr = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n = garr.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n + 1, dtype=np.float64)
    if n < 1:
        return out
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.empty(n + 1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dgr = np.empty(n, dtype=np.float64)
    cdef double[::1] gv = garr
    cdef double[::1] cv = c
    cdef double[::1] rv = dgr
    cdef double[::1] ov = out
    cdef Py_ssize_t d, k, t, o
    cdef double dd, acc, scale
    scale = pow(h, -alpha) * exp(-lgamma(2.0 - alpha))
    with nogil:
        cv[0] = 0.0
        for d in range(1, n + 1):
            dd = <double> d
            cv[d] = pow(dd, 1.0 - alpha) - pow(dd - 1.0, 1.0 - alpha)
        # reversed increments so the correlation reads both streams forward
        for t in range(n):
            rv[t] = gv[n - t] - gv[n - t - 1]
        for k in range(1, n + 1):
            acc = 0.0
            o = k - n  # cv index is o + t + 1
            for t in range(n - k, n):
                acc += rv[t] * cv[o + t + 1]
            ov[k] = acc * scale
    return out
