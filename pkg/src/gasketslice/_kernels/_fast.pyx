# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as the NumPy reference in _ref.py.

The matrices here are small (m <= 16) and sparse (one or two ones per
column), so products are applied through per-column support lists; the word
tree is walked by plain C recursion sharing prefix vectors on a stack.
Integer kernels return results identical to the reference implementation;
float kernels apply the same operations in the same order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log
from libcpp.algorithm cimport sort as cpp_sort
from libcpp.pair cimport pair
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

cnp.import_array()

ctypedef long long i64
ctypedef pair[i64, i64] kv

DEF MAX_M = 16


cdef struct Cols:
    # column-major sparse layout: for column j, rows/vals in [ptr[j], ptr[j+1])
    int m
    int ptr[MAX_M + 1]
    int row[2 * MAX_M]
    i64 val[2 * MAX_M]


cdef int _build_cols(object A, Cols* out) except -1:
    arr = np.ascontiguousarray(A, dtype=np.int64)
    cdef int m = arr.shape[0]
    if m > MAX_M or arr.shape[1] != m:
        raise ValueError(f"kernel matrices must be square with m <= {MAX_M}")
    cdef int nnz = 0, i, j
    out.m = m
    for j in range(m):
        out.ptr[j] = nnz
        for i in range(m):
            v = int(arr[i, j])
            if v:
                if nnz >= 2 * MAX_M:
                    raise ValueError("kernel matrices limited to 2 entries per column")
                out.row[nnz] = i
                out.val[nnz] = v
                nnz += 1
    out.ptr[m] = nnz
    return 0


cdef inline void _apply_i64(Cols* C, i64* u, i64* v) noexcept nogil:
    cdef int j, t
    for j in range(C.m):
        v[j] = 0
        for t in range(C.ptr[j], C.ptr[j + 1]):
            v[j] += C.val[t] * u[C.row[t]]


cdef inline void _apply_f64(Cols* C, double* u, double* v) noexcept nogil:
    cdef int j, t
    for j in range(C.m):
        v[j] = 0.0
        for t in range(C.ptr[j], C.ptr[j + 1]):
            v[j] += C.val[t] * u[C.row[t]]


# ---------------------------------------------------------------------------
# tally_dots
# ---------------------------------------------------------------------------

cdef void _tally_rec(Cols* A0, Cols* A1, i64* w, i64* stack, int depth, int n,
                     unordered_map[i64, i64]* acc) noexcept nogil:
    cdef int m = A0.m
    cdef i64* u = stack + depth * m
    cdef i64 key = 0
    cdef int j
    if depth == n:
        for j in range(m):
            key += u[j] * w[j]
        (acc[0])[key] += 1
        return
    _apply_i64(A0, u, stack + (depth + 1) * m)
    _tally_rec(A0, A1, w, stack, depth + 1, n, acc)
    _apply_i64(A1, u, stack + (depth + 1) * m)
    _tally_rec(A0, A1, w, stack, depth + 1, n, acc)


def tally_dots(A0, A1, weights, int n, block_levels=None):
    """Multiset of e^T A_w weights over all 2^n words; see _ref.tally_dots."""
    cdef Cols c0, c1
    _build_cols(A0, &c0)
    _build_cols(A1, &c1)
    cdef int m = c0.m
    w_arr = np.ascontiguousarray(weights, dtype=np.int64)
    cdef i64[::1] w = w_arr
    stack_arr = np.ones(((n + 1) * m,), dtype=np.int64)
    cdef i64[::1] stack = stack_arr
    cdef unordered_map[i64, i64] acc
    cdef int j
    for j in range(m):
        stack[j] = 1
    with nogil:
        _tally_rec(&c0, &c1, &w[0], &stack[0], 0, n, &acc)
    cdef vector[kv] items
    items.reserve(acc.size())
    for it in acc:
        items.push_back(it)
    cpp_sort(items.begin(), items.end())
    vals = np.empty(items.size(), dtype=np.int64)
    cnts = np.empty(items.size(), dtype=np.int64)
    cdef i64[::1] vv = vals
    cdef i64[::1] cc = cnts
    cdef size_t k
    for k in range(items.size()):
        vv[k] = items[k].first
        cc[k] = items[k].second
    return vals, cnts


# ---------------------------------------------------------------------------
# envelope_scan
# ---------------------------------------------------------------------------

cdef struct Extremes:
    i64 min_val
    i64 max_val
    unsigned long long min_word
    unsigned long long max_word
    int initialized


cdef void _envelope_rec(Cols* A0, Cols* A1, i64* stack, int depth, int n,
                        unsigned long long word, Extremes* ext) noexcept nogil:
    cdef int m = A0.m
    cdef i64* u = stack + depth * m
    cdef i64 s = 0
    cdef int j
    if depth == n:
        for j in range(m):
            s += u[j]
        if not ext.initialized:
            ext.min_val = s; ext.max_val = s
            ext.min_word = word; ext.max_word = word
            ext.initialized = 1
        else:
            if s < ext.min_val:
                ext.min_val = s; ext.min_word = word
            if s > ext.max_val:
                ext.max_val = s; ext.max_word = word
        return
    _apply_i64(A0, u, stack + (depth + 1) * m)
    _envelope_rec(A0, A1, stack, depth + 1, n, word, ext)
    _apply_i64(A1, u, stack + (depth + 1) * m)
    _envelope_rec(A0, A1, stack, depth + 1, n,
                  word | (<unsigned long long>1 << depth), ext)


def envelope_scan(A0, A1, int n, block_levels=None):
    """Extremes of e^T A_w e with lexicographically-first witness words."""
    if n > 63:
        raise ValueError("envelope words limited to n <= 63")
    cdef Cols c0, c1
    _build_cols(A0, &c0)
    _build_cols(A1, &c1)
    cdef int m = c0.m
    stack_arr = np.ones(((n + 1) * m,), dtype=np.int64)
    cdef i64[::1] stack = stack_arr
    cdef Extremes ext
    ext.initialized = 0
    with nogil:
        _envelope_rec(&c0, &c1, &stack[0], 0, n, 0, &ext)
    min_word = np.array([(ext.min_word >> s) & 1 for s in range(n)], dtype=np.uint8)
    max_word = np.array([(ext.max_word >> s) & 1 for s in range(n)], dtype=np.uint8)
    return int(ext.min_val), int(ext.max_val), min_word, max_word


# ---------------------------------------------------------------------------
# score_words
# ---------------------------------------------------------------------------

def score_words(A0, A1, left, right, bits):
    """ln(left^T A_w right) per word row; -inf marks exact zero products."""
    cdef Cols c0, c1
    _build_cols(A0, &c0)
    _build_cols(A1, &c1)
    cdef int m = c0.m
    bits_arr = np.ascontiguousarray(bits, dtype=np.uint8)
    cdef const unsigned char[:, ::1] B = bits_arr
    cdef Py_ssize_t trials = B.shape[0], n = B.shape[1]
    left_arr = np.ascontiguousarray(left, dtype=np.float64)
    right_arr = np.ascontiguousarray(right, dtype=np.float64)
    cdef const double[::1] lv = left_arr
    cdef const double[::1] rv = right_arr
    out = np.empty(trials, dtype=np.float64)
    cdef double[::1] o_view = out
    cdef double u[MAX_M]
    cdef double v[MAX_M]
    cdef double acc, s, fin
    cdef Py_ssize_t t, k
    cdef int j, dead
    cdef Cols* C
    with nogil:
        for t in range(trials):
            for j in range(m):
                u[j] = lv[j]
            acc = 0.0
            dead = 0
            for k in range(n):
                C = &c1 if B[t, k] else &c0
                _apply_f64(C, u, v)
                s = 0.0
                for j in range(m):
                    s += v[j]
                if s == 0.0:
                    dead = 1
                    break
                acc += log(s)
                for j in range(m):
                    u[j] = v[j] / s
            if dead:
                o_view[t] = -INFINITY
                continue
            fin = 0.0
            for j in range(m):
                fin += u[j] * rv[j]
            o_view[t] = acc + log(fin) if fin > 0.0 else -INFINITY
    return out


# ---------------------------------------------------------------------------
# sample_eta_words
# ---------------------------------------------------------------------------

def sample_eta_words(A0, A1, p, uniforms):
    """Sample words from the stationary word measure; see _ref for contract."""
    cdef Cols c0, c1
    _build_cols(A0, &c0)
    _build_cols(A1, &c1)
    cdef int m = c0.m
    uni_arr = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef const double[:, ::1] U = uni_arr
    cdef Py_ssize_t trials = U.shape[0], n = U.shape[1]
    p_arr = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] pv = p_arr
    bits = np.empty((trials, n), dtype=np.uint8)
    logs = np.empty(trials, dtype=np.float64)
    cdef unsigned char[:, ::1] bits_v = bits
    cdef double[::1] logs_v = logs
    cdef double u[MAX_M]
    cdef double v0[MAX_M]
    cdef double v1[MAX_M]
    cdef double acc, w0, w1, p0, s, fin
    cdef Py_ssize_t t, k
    cdef int j, b
    with nogil:
        for t in range(trials):
            for j in range(m):
                u[j] = 1.0
            acc = 0.0
            for k in range(n):
                _apply_f64(&c0, u, v0)
                _apply_f64(&c1, u, v1)
                w0 = 0.0
                w1 = 0.0
                for j in range(m):
                    w0 += v0[j] * pv[j]
                    w1 += v1[j] * pv[j]
                p0 = w0 / (w0 + w1)
                b = 1 if U[t, k] >= p0 else 0
                bits_v[t, k] = b
                s = 0.0
                if b:
                    for j in range(m):
                        s += v1[j]
                    acc += log(s)
                    for j in range(m):
                        u[j] = v1[j] / s
                else:
                    for j in range(m):
                        s += v0[j]
                    acc += log(s)
                    for j in range(m):
                        u[j] = v0[j] / s
            fin = 0.0
            for j in range(m):
                fin += u[j] * pv[j]
            logs_v[t] = acc + log(fin)
    return bits, logs
