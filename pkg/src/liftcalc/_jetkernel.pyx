# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernels for truncated multivariate Taylor arithmetic.

Coefficient arrays have shape ``(2**d, m)``: row ``s`` holds the coefficient of
the monomial ``prod(eps_i for i in bits(s))`` and every ``eps_i`` squares to zero.
"""
import numpy as np


def mul(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t size = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    out = np.zeros((size, m))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t s, t, u, j
    for s in range(size):
        t = s
        while True:
            u = s ^ t
            for j in range(m):
                o[s, j] += a[t, j] * b[u, j]
            if t == 0:
                break
            t = (t - 1) & s
    return out


def horner(const double[:, ::1] coeffs, const double[:, ::1] nil):
    """Evaluate ``sum_k coeffs[k] * nil**k`` for a nilpotent ``nil`` (row 0 ignored)."""
    cdef Py_ssize_t size = nil.shape[0]
    cdef Py_ssize_t m = nil.shape[1]
    cdef Py_ssize_t order = coeffs.shape[0] - 1
    acc = np.zeros((size, m))
    tmp = np.zeros((size, m))
    cdef double[:, ::1] r = acc
    cdef double[:, ::1] w = tmp
    cdef Py_ssize_t k, s, t, u, j
    for j in range(m):
        r[0, j] = coeffs[order, j]
    for k in range(order - 1, -1, -1):
        w[:, :] = 0.0
        for s in range(size):
            # nil has no constant term, so t = s contributes nothing
            t = (s - 1) & s
            while True:
                u = s ^ t
                if u != 0:
                    for j in range(m):
                        w[s, j] += r[t, j] * nil[u, j]
                if t == 0:
                    break
                t = (t - 1) & s
        for s in range(size):
            for j in range(m):
                r[s, j] = w[s, j]
        for j in range(m):
            r[0, j] += coeffs[k, j]
    return acc
