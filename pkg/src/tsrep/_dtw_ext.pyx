# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled DTW kernel: banded DP with two rolling rows, O(min(n,m)) memory.

Cost is |a_i - b_j| summed along the warping path, no normalization.
window < 0 means unconstrained; callers must ensure window >= |n - m|
otherwise. Inputs are validated at the Python dispatch layer.
"""

from libc.math cimport HUGE_VAL
from libc.stdlib cimport free, malloc

KERNEL_NAME = "cython"


cdef double _dtw_core(const double* a, Py_ssize_t n,
                      const double* b, Py_ssize_t m,
                      long window, double* prev, double* curr) nogil:
    cdef Py_ssize_t i, j, jlo, jhi
    cdef double cost, best, tmp
    cdef double* swap
    cdef long w = window
    if w < 0:
        w = <long> (n + m)  # wider than any reachable offset
    for j in range(m):
        prev[j] = HUGE_VAL
        curr[j] = HUGE_VAL
    for i in range(n):
        jlo = i - w
        if jlo < 0:
            jlo = 0
        jhi = i + w
        if jhi > m - 1:
            jhi = m - 1
        if jlo > 0:
            curr[jlo - 1] = HUGE_VAL
        for j in range(jlo, jhi + 1):
            cost = a[i] - b[j]
            if cost < 0:
                cost = -cost
            if i == 0 and j == 0:
                best = 0.0
            else:
                best = HUGE_VAL
                if i > 0:
                    tmp = prev[j]
                    if tmp < best:
                        best = tmp
                    if j > 0:
                        tmp = prev[j - 1]
                        if tmp < best:
                            best = tmp
                if j > jlo:
                    tmp = curr[j - 1]
                    if tmp < best:
                        best = tmp
            curr[j] = cost + best
        if jhi + 1 < m:
            curr[jhi + 1] = HUGE_VAL
        swap = prev
        prev = curr
        curr = swap
    return prev[m - 1]


def dtw_one(const double[::1] a, const double[::1] b, long window):
    """Distance between two non-empty sequences."""
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    cdef double* prev = <double*> malloc(m * sizeof(double))
    cdef double* curr = <double*> malloc(m * sizeof(double))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()
    cdef double out
    try:
        with nogil:
            out = _dtw_core(&a[0], n, &b[0], m, window, prev, curr)
    finally:
        free(prev)
        free(curr)
    return out


def dtw_cross(const double[:, ::1] A, const double[:, ::1] B, long window,
              double[::1] out):
    """All-pairs distances between two batches of equal-length sequences.

    out must have A.shape[0] * B.shape[0] entries; row-major over (ia, ib).
    """
    cdef Py_ssize_t na = A.shape[0], nb = B.shape[0]
    cdef Py_ssize_t la = A.shape[1], lb = B.shape[1]
    cdef Py_ssize_t ia, ib
    if out.shape[0] != na * nb:
        raise ValueError("output buffer has wrong size")
    cdef double* prev = <double*> malloc(lb * sizeof(double))
    cdef double* curr = <double*> malloc(lb * sizeof(double))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()
    try:
        with nogil:
            for ia in range(na):
                for ib in range(nb):
                    out[ia * nb + ib] = _dtw_core(
                        &A[ia, 0], la, &B[ib, 0], lb, window, prev, curr)
    finally:
        free(prev)
        free(curr)
