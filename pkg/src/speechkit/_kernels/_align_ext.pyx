# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Levenshtein alignment kernels."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

# op codes shared with the pure-Python fallback
cdef enum:
    EQ = 0
    SUB = 1
    DEL = 2
    INS = 3


cdef inline int _min3(int a, int b, int c) nogil:
    if b < a:
        a = b
    if c < a:
        a = c
    return a


cdef int _fill(const int* ref, int n, const int* hyp, int m, int* d, int start=1) nogil:
    # d is (n+1) x (m+1), row-major; rows below ``start`` are assumed valid
    cdef int i, j, w = m + 1, cost
    if start <= 1:
        start = 1
        for j in range(w):
            d[j] = j
    for i in range(start, n + 1):
        d[i * w] = i
        for j in range(1, w):
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            d[i * w + j] = _min3(d[(i - 1) * w + j - 1] + cost,
                                 d[(i - 1) * w + j] + 1,
                                 d[i * w + j - 1] + 1)
    return d[n * w + m]


cdef int _backtrace(const int* ref, int n, const int* hyp, int m, const int* d,
                    int* ops, int* ri, int* hj) nogil:
    # Walks from (n, m) to (0, 0); writes ops in reverse order, returns count.
    cdef int i = n, j = m, w = m + 1, k = 0, here
    while i > 0 or j > 0:
        here = d[i * w + j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and d[(i - 1) * w + j - 1] == here:
            ops[k] = EQ
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and d[(i - 1) * w + j - 1] + 1 == here:
            ops[k] = SUB
            i -= 1
            j -= 1
        elif i > 0 and d[(i - 1) * w + j] + 1 == here:
            ops[k] = DEL
            i -= 1
        else:
            ops[k] = INS
            j -= 1
        ri[k] = i if ops[k] != INS else -1
        hj[k] = j if ops[k] != DEL else -1
        k += 1
    return k


def align_codes(int[::1] ref not None, int[::1] hyp not None):
    """Align two integer sequences; returns (ops, ref_idx, hyp_idx) arrays.

    Indices are -1 on the side that carries no token (INS / DEL).
    """
    cdef int n = ref.shape[0], m = hyp.shape[0], k, t
    cdef int* d = <int*> malloc((n + 1) * (m + 1) * sizeof(int))
    cdef int* ops = <int*> malloc((n + m + 1) * sizeof(int))
    cdef int* ri = <int*> malloc((n + m + 1) * sizeof(int))
    cdef int* hj = <int*> malloc((n + m + 1) * sizeof(int))
    cdef const int* rp = &ref[0] if n > 0 else NULL
    cdef const int* hp = &hyp[0] if m > 0 else NULL
    try:
        _fill(rp, n, hp, m, d)
        k = _backtrace(rp, n, hp, m, d, ops, ri, hj)
        out_ops = np.empty(k, dtype=np.int32)
        out_r = np.empty(k, dtype=np.int32)
        out_h = np.empty(k, dtype=np.int32)
        for t in range(k):
            out_ops[t] = ops[k - 1 - t]
            out_r[t] = ri[k - 1 - t]
            out_h[t] = hj[k - 1 - t]
        return out_ops, out_r, out_h
    finally:
        free(d)
        free(ops)
        free(ri)
        free(hj)


def align_error_counts(int[:, ::1] refs not None, int[::1] ref_lens not None,
                       int[::1] hyp not None):
    """Errors of the backtraced alignment of ``hyp`` against every row of ``refs``.

    Row ``r`` of ``refs`` holds a reference padded to a common width; only the
    first ``ref_lens[r]`` entries are used.
    """
    cdef Py_ssize_t n_refs = refs.shape[0], r
    cdef int width = refs.shape[1], m = hyp.shape[0], k, t, errs, shared, lim
    out = np.empty(n_refs, dtype=np.int32)
    cdef int[::1] outv = out
    if width == 0:
        out[:] = m
        return out
    cdef int* d = <int*> malloc((width + 1) * (m + 1) * sizeof(int))
    cdef int* ops = <int*> malloc((width + m + 1) * sizeof(int))
    cdef int* ri = <int*> malloc((width + m + 1) * sizeof(int))
    cdef int* hj = <int*> malloc((width + m + 1) * sizeof(int))
    cdef const int* hp = &hyp[0] if m > 0 else NULL
    try:
        with nogil:
            for r in range(n_refs):
                # rows of the DP table depend only on the reference prefix
                shared = 0
                if r > 0:
                    lim = ref_lens[r] if ref_lens[r] < ref_lens[r - 1] else ref_lens[r - 1]
                    while shared < lim and refs[r, shared] == refs[r - 1, shared]:
                        shared += 1
                _fill(&refs[r, 0], ref_lens[r], hp, m, d, shared + 1)
                k = _backtrace(&refs[r, 0], ref_lens[r], hp, m, d, ops, ri, hj)
                errs = 0
                for t in range(k):
                    if ops[t] != EQ:
                        errs += 1
                outv[r] = errs
        return out
    finally:
        free(d)
        free(ops)
        free(ri)
        free(hj)
