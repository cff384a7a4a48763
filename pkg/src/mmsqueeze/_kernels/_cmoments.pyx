# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-block factorial-moment reduction."""
import numpy as np

cimport numpy as cnp

DEF MAX_ORDER = 16


def block_factorial_sums(const cnp.int64_t[::1] ns, const cnp.int64_t[::1] ni,
                         Py_ssize_t n_blocks, int order):
    cdef Py_ssize_t n = ns.shape[0]
    if ni.shape[0] != n:
        raise ValueError("signal and idler records differ in length")
    if order < 0 or order > MAX_ORDER:
        raise ValueError("order out of range")
    if n_blocks < 1 or n_blocks > n:
        raise ValueError("need 1 <= n_blocks <= number of records")
    out = np.zeros((n_blocks, order + 1, order + 1), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef double fs[MAX_ORDER + 1]
    cdef double fi[MAX_ORDER + 1]
    cdef Py_ssize_t b, p, start, stop
    cdef int a, c
    with nogil:
        for b in range(n_blocks):
            start = b * n // n_blocks
            stop = (b + 1) * n // n_blocks
            for p in range(start, stop):
                fs[0] = 1.0
                fi[0] = 1.0
                for a in range(1, order + 1):
                    fs[a] = fs[a - 1] * <double>(ns[p] - a + 1)
                    fi[a] = fi[a - 1] * <double>(ni[p] - a + 1)
                for a in range(order + 1):
                    for c in range(order + 1):
                        o[b, a, c] += fs[a] * fi[c]
    return out
