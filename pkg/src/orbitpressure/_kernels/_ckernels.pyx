# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contract as ``_pykernels``.

FK ball membership uses a bit-parallel LCS over the band ``|i - j| <= n - m``
(any order-preserving matching of size ``m`` stays inside that band).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport ldexp, fabs, INFINITY
from libc.stdint cimport uint8_t, uint64_t, int64_t
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"

cdef extern from *:
    """
    static inline int op_popcount64(unsigned long long x) { return __builtin_popcountll(x); }
    static inline int op_ctz64(unsigned long long x) { return __builtin_ctzll(x); }
    """
    int popcount64 "op_popcount64"(unsigned long long x) nogil
    int ctz64 "op_ctz64"(unsigned long long x) nogil


cdef enum:
    BOWEN = 0
    MEAN = 1
    MAXMEAN = 2
    FK = 3


cdef inline double _sym_first_diff(const uint8_t* a, Py_ssize_t la, Py_ssize_t sa,
                                   const uint8_t* b, Py_ssize_t lb, Py_ssize_t sb) noexcept nogil:
    cdef Py_ssize_t c = la - sa
    cdef Py_ssize_t j
    if lb - sb < c:
        c = lb - sb
    for j in range(c):
        if a[sa + j] != b[sb + j]:
            return ldexp(1.0, <int>(-j))
    return 0.0


cdef inline bint _sym_agree(const uint8_t* a, Py_ssize_t la, Py_ssize_t sa,
                            const uint8_t* b, Py_ssize_t lb, Py_ssize_t sb, Py_ssize_t J) noexcept nogil:
    cdef Py_ssize_t c = la - sa
    cdef Py_ssize_t j
    if lb - sb < c:
        c = lb - sb
    if J < c:
        c = J
    for j in range(c):
        if a[sa + j] != b[sb + j]:
            return 0
    return 1


cdef inline double _circ(double x, double y) noexcept nogil:
    cdef double t = fabs(x - y)
    cdef double u = 1.0 - t
    return u if u < t else t


cdef void _sym_diag_into(const uint8_t* a, Py_ssize_t la, const uint8_t* b, Py_ssize_t lb,
                         Py_ssize_t n, Py_ssize_t q, double* out) noexcept nogil:
    cdef Py_ssize_t c = la if la < lb else lb
    cdef Py_ssize_t p = 0, s, i
    for i in range(n):
        s = q * i
        if p < s:
            p = s
        while p < c and a[p] == b[p]:
            p += 1
        out[i] = ldexp(1.0, <int>(-(p - s))) if p < c else 0.0


cdef double _reduce(const double* d, Py_ssize_t n, int family) noexcept nogil:
    cdef double runmax = 0.0, s = 0.0, best = 0.0, m, v
    cdef Py_ssize_t k
    for k in range(1, n + 1):
        v = d[k - 1]
        if v > runmax:
            runmax = v
        s += v
        if family == MAXMEAN:
            m = s / k
            if m > runmax:
                m = runmax
            if m > best:
                best = m
    if family == BOWEN:
        return runmax
    if family == MEAN:
        m = s / n
        return runmax if m > runmax else m
    return best


cdef bint _within_stream_sym(const uint8_t* a, Py_ssize_t la, const uint8_t* b, Py_ssize_t lb,
                             Py_ssize_t n, Py_ssize_t q, double r, int family) noexcept nogil:
    # same values as _sym_diag_into + _reduce, with exits that cannot change the verdict
    cdef Py_ssize_t c = la if la < lb else lb
    cdef Py_ssize_t p = 0, s, i
    cdef double v, runmax = 0.0, acc = 0.0, best = 0.0, m
    for i in range(n):
        s = q * i
        if p < s:
            p = s
        while p < c and a[p] == b[p]:
            p += 1
        v = ldexp(1.0, <int>(-(p - s))) if p < c else 0.0
        if v > runmax:
            runmax = v
        acc += v
        if family == BOWEN:
            if runmax >= r:
                return 0
        elif family == MEAN:
            m = acc / n
            if runmax >= r and m >= r:
                return 0
        else:
            m = acc / (i + 1)
            if m > runmax:
                m = runmax
            if m > best:
                best = m
            if best >= r:
                return 0
    if family == BOWEN:
        return runmax < r
    if family == MEAN:
        m = acc / n
        if m > runmax:
            m = runmax
        return m < r
    return best < r


cdef bint _within_stream_circ(const double* oa, const double* ob, Py_ssize_t n,
                              double r, int family) noexcept nogil:
    cdef Py_ssize_t i
    cdef double v, runmax = 0.0, acc = 0.0, best = 0.0, m
    for i in range(n):
        v = _circ(oa[i], ob[i])
        if v > runmax:
            runmax = v
        acc += v
        if family == BOWEN:
            if runmax >= r:
                return 0
        elif family == MEAN:
            m = acc / n
            if runmax >= r and m >= r:
                return 0
        else:
            m = acc / (i + 1)
            if m > runmax:
                m = runmax
            if m > best:
                best = m
            if best >= r:
                return 0
    if family == BOWEN:
        return runmax < r
    if family == MEAN:
        m = acc / n
        if m > runmax:
            m = runmax
        return m < r
    return best < r


cdef Py_ssize_t _lcs_bits(const uint64_t* rows, Py_ssize_t nrows, Py_ssize_t ncols) noexcept nogil:
    # bit-parallel LCS length (Hyyro): columns packed in one word, ncols <= 64
    cdef uint64_t full = <uint64_t>(-1) if ncols == 64 else ((<uint64_t>1 << ncols) - 1)
    cdef uint64_t V = full, U
    cdef Py_ssize_t i
    for i in range(nrows):
        U = V & rows[i]
        V = ((V + U) | (V - U)) & full
    return ncols - popcount64(V)


cdef Py_ssize_t _lcs_dp(const uint8_t* mask, Py_ssize_t n, Py_ssize_t m, int* buf) noexcept nogil:
    # plain DP for grids wider than one machine word; buf holds 2*(m+1) ints
    cdef int* prev = buf
    cdef int* cur = buf + (m + 1)
    cdef int* tmp
    cdef Py_ssize_t i, j
    for j in range(m + 1):
        prev[j] = 0
    for i in range(n):
        cur[0] = 0
        for j in range(1, m + 1):
            if mask[i * m + j - 1]:
                cur[j] = prev[j - 1] + 1
            elif cur[j - 1] > prev[j]:
                cur[j] = cur[j - 1]
            else:
                cur[j] = prev[j]
        tmp = prev
        prev = cur
        cur = tmp
    return prev[m]


cdef bint _fk_within_sym(const uint8_t* a, Py_ssize_t la, const uint8_t* b, Py_ssize_t lb,
                         Py_ssize_t n, Py_ssize_t q, Py_ssize_t J, Py_ssize_t m_min,
                         uint64_t* rowbits, uint8_t* mask, int* buf) noexcept nogil:
    cdef Py_ssize_t band = n - m_min
    cdef Py_ssize_t i, j, lo, hi, empty = 0
    cdef uint64_t bits
    cdef bint hit
    if m_min <= 0:
        return 1
    if band == 0:
        for i in range(n):
            if not _sym_agree(a, la, q * i, b, lb, q * i, J):
                return 0
        return 1
    if n <= 64:
        for i in range(n):
            lo = i - band
            if lo < 0:
                lo = 0
            hi = i + band
            if hi > n - 1:
                hi = n - 1
            bits = 0
            for j in range(lo, hi + 1):
                if _sym_agree(a, la, q * i, b, lb, q * j, J):
                    bits |= (<uint64_t>1) << j
            rowbits[i] = bits
            if bits == 0:
                empty += 1
                if empty > band:
                    return 0
        return _lcs_bits(rowbits, n, n) >= m_min
    for i in range(n):
        hit = 0
        for j in range(n):
            mask[i * n + j] = 0
            if i - j <= band and j - i <= band and _sym_agree(a, la, q * i, b, lb, q * j, J):
                mask[i * n + j] = 1
                hit = 1
        if not hit:
            empty += 1
            if empty > band:
                return 0
    return _lcs_dp(mask, n, n, buf) >= m_min


cdef bint _fk_within_circ(const double* oa, const double* ob, Py_ssize_t n, double r,
                          Py_ssize_t m_min, uint64_t* rowbits, uint8_t* mask, int* buf) noexcept nogil:
    cdef Py_ssize_t band = n - m_min
    cdef Py_ssize_t i, j, lo, hi, empty = 0
    cdef uint64_t bits
    cdef bint hit
    if m_min <= 0:
        return 1
    if band == 0:
        for i in range(n):
            if not _circ(oa[i], ob[i]) < r:
                return 0
        return 1
    if n <= 64:
        for i in range(n):
            lo = i - band
            if lo < 0:
                lo = 0
            hi = i + band
            if hi > n - 1:
                hi = n - 1
            bits = 0
            for j in range(lo, hi + 1):
                if _circ(oa[i], ob[j]) < r:
                    bits |= (<uint64_t>1) << j
            rowbits[i] = bits
            if bits == 0:
                empty += 1
                if empty > band:
                    return 0
        return _lcs_bits(rowbits, n, n) >= m_min
    for i in range(n):
        hit = 0
        for j in range(n):
            mask[i * n + j] = 0
            if i - j <= band and j - i <= band and _circ(oa[i], ob[j]) < r:
                mask[i * n + j] = 1
                hit = 1
        if not hit:
            empty += 1
            if empty > band:
                return 0
    return _lcs_dp(mask, n, n, buf) >= m_min


# ---------------------------------------------------------------------------
# python-visible API

def sym_diag(const uint8_t[::1] a, const uint8_t[::1] b, Py_ssize_t n, Py_ssize_t q):
    out = np.empty(n)
    cdef double[::1] o = out
    _sym_diag_into(&a[0], a.shape[0], &b[0], b.shape[0], n, q, &o[0])
    return out


def sym_grid(const uint8_t[::1] a, const uint8_t[::1] b, Py_ssize_t n, Py_ssize_t q):
    out = np.empty((n, n))
    cdef double[:, ::1] g = out
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(n):
                g[i, j] = _sym_first_diff(&a[0], a.shape[0], q * i, &b[0], b.shape[0], q * j)
    return out


def circ_diag(const double[::1] oa, const double[::1] ob):
    cdef Py_ssize_t n = oa.shape[0], i
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = _circ(oa[i], ob[i])
    return out


def circ_grid(const double[::1] oa, const double[::1] ob):
    cdef Py_ssize_t n = oa.shape[0], m = ob.shape[0], i, j
    out = np.empty((n, m))
    cdef double[:, ::1] g = out
    for i in range(n):
        for j in range(m):
            g[i, j] = _circ(oa[i], ob[j])
    return out


def reduce_diag(const double[::1] d, int family):
    return _reduce(&d[0], d.shape[0], family)


def fk_tau(const double[:, ::1] grid):
    cdef Py_ssize_t n = grid.shape[0], i, j, m, top, w = n + 1
    cdef double* prev = <double*>malloc(w * w * sizeof(double))
    cdef double* cur = <double*>malloc(w * w * sizeof(double))
    cdef double* tmp
    cdef double g, c, best
    with nogil:
        for j in range(w * w):
            prev[j] = INFINITY
        for j in range(w):
            prev[j * w] = 0.0
        for i in range(1, n + 1):
            for m in range(w):
                cur[m] = INFINITY
            cur[0] = 0.0
            for j in range(1, n + 1):
                g = grid[i - 1, j - 1]
                cur[j * w] = 0.0
                top = i if i < j else j
                for m in range(1, w):
                    if m > top:
                        cur[j * w + m] = INFINITY
                        continue
                    best = prev[j * w + m]
                    if cur[(j - 1) * w + m] < best:
                        best = cur[(j - 1) * w + m]
                    c = prev[(j - 1) * w + m - 1]
                    if g > c:
                        c = g
                    if c < best:
                        best = c
                    cur[j * w + m] = best
            tmp = prev
            prev = cur
            cur = tmp
    out = np.empty(w)
    for m in range(w):
        out[m] = prev[n * w + m]
    free(prev)
    free(cur)
    return out


def lcs_mask(mask):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] mk = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n = mk.shape[0], m = mk.shape[1], i, j
    cdef uint64_t* rows
    cdef int* buf
    cdef Py_ssize_t res
    if n == 0 or m == 0:
        return 0
    if m <= 64:
        rows = <uint64_t*>malloc(n * sizeof(uint64_t))
        for i in range(n):
            rows[i] = 0
            for j in range(m):
                if mk[i, j]:
                    rows[i] |= (<uint64_t>1) << j
        res = _lcs_bits(rows, n, m)
        free(rows)
        return int(res)
    buf = <int*>malloc(2 * (m + 1) * sizeof(int))
    res = _lcs_dp(<uint8_t*>mk.data, n, m, buf)
    free(buf)
    return int(res)


def sym_within_many(const uint8_t[::1] c, const uint8_t[:, ::1] W, Py_ssize_t n, Py_ssize_t q,
                    double r, int family, Py_ssize_t J, Py_ssize_t m_min):
    cdef Py_ssize_t M = W.shape[0], L = W.shape[1], p
    out = np.zeros(M, dtype=np.uint8)
    cdef uint8_t[::1] o = out
    cdef uint64_t* rowbits = <uint64_t*>malloc((n + 1) * sizeof(uint64_t))
    cdef uint8_t* mask = <uint8_t*>malloc(n * n + 1)
    cdef int* buf = <int*>malloc(2 * (n + 1) * sizeof(int))
    with nogil:
        for p in range(M):
            if family == FK:
                o[p] = _fk_within_sym(&c[0], c.shape[0], &W[p, 0], L, n, q, J, m_min, rowbits, mask, buf)
            else:
                o[p] = _within_stream_sym(&c[0], c.shape[0], &W[p, 0], L, n, q, r, family)
    free(rowbits)
    free(mask)
    free(buf)
    return out


def circ_within_many(const double[::1] oc, const double[:, ::1] O, double r, int family, Py_ssize_t m_min):
    cdef Py_ssize_t M = O.shape[0], n = O.shape[1], p
    out = np.zeros(M, dtype=np.uint8)
    cdef uint8_t[::1] o = out
    cdef uint64_t* rowbits = <uint64_t*>malloc((n + 1) * sizeof(uint64_t))
    cdef uint8_t* mask = <uint8_t*>malloc(n * n + 1)
    cdef int* buf = <int*>malloc(2 * (n + 1) * sizeof(int))
    with nogil:
        for p in range(M):
            if family == FK:
                o[p] = _fk_within_circ(&oc[0], &O[p, 0], n, r, m_min, rowbits, mask, buf)
            else:
                o[p] = _within_stream_circ(&oc[0], &O[p, 0], n, r, family)
    free(rowbits)
    free(mask)
    free(buf)
    return out


cdef inline void _setbit(uint64_t* words, Py_ssize_t nw, Py_ssize_t row, Py_ssize_t col) noexcept nogil:
    words[row * nw + (col >> 6)] |= (<uint64_t>1) << (col & 63)


def sym_ball_words(const uint8_t[:, ::1] W, Py_ssize_t n, Py_ssize_t q, double r, int family,
                   Py_ssize_t J, Py_ssize_t m_min):
    cdef Py_ssize_t M = W.shape[0], L = W.shape[1], a, b
    cdef Py_ssize_t nw = (M + 63) // 64
    out = np.zeros((M, nw), dtype=np.uint64)
    cdef uint64_t[:, ::1] words = out
    cdef uint64_t* rowbits = <uint64_t*>malloc((n + 1) * sizeof(uint64_t))
    cdef uint8_t* mask = <uint8_t*>malloc(n * n + 1)
    cdef int* buf = <int*>malloc(2 * (n + 1) * sizeof(int))
    cdef bint hit
    with nogil:
        for a in range(M):
            for b in range(a, M):
                if family == FK:
                    hit = _fk_within_sym(&W[a, 0], L, &W[b, 0], L, n, q, J, m_min, rowbits, mask, buf)
                else:
                    hit = _within_stream_sym(&W[a, 0], L, &W[b, 0], L, n, q, r, family)
                if hit:
                    _setbit(&words[0, 0], nw, a, b)
                    _setbit(&words[0, 0], nw, b, a)
    free(rowbits)
    free(mask)
    free(buf)
    return out


def circ_ball_words(const double[:, ::1] O, double r, int family, Py_ssize_t m_min):
    cdef Py_ssize_t M = O.shape[0], n = O.shape[1], a, b
    cdef Py_ssize_t nw = (M + 63) // 64
    out = np.zeros((M, nw), dtype=np.uint64)
    cdef uint64_t[:, ::1] words = out
    cdef uint64_t* rowbits = <uint64_t*>malloc((n + 1) * sizeof(uint64_t))
    cdef uint8_t* mask = <uint8_t*>malloc(n * n + 1)
    cdef int* buf = <int*>malloc(2 * (n + 1) * sizeof(int))
    cdef bint hit
    with nogil:
        for a in range(M):
            for b in range(a, M):
                if family == FK:
                    hit = _fk_within_circ(&O[a, 0], &O[b, 0], n, r, m_min, rowbits, mask, buf)
                else:
                    hit = _within_stream_circ(&O[a, 0], &O[b, 0], n, r, family)
                if hit:
                    _setbit(&words[0, 0], nw, a, b)
                    _setbit(&words[0, 0], nw, b, a)
    free(rowbits)
    free(mask)
    free(buf)
    return out


def row_gains(const uint64_t[:, ::1] words, const int64_t[::1] rows,
              const uint64_t[::1] covered, const double[::1] weights):
    cdef Py_ssize_t nr = rows.shape[0], nw = words.shape[1], t, w, c
    out = np.zeros(nr)
    cdef double[::1] o = out
    cdef uint64_t x
    cdef double total
    with nogil:
        for t in range(nr):
            c = rows[t]
            total = 0.0
            for w in range(nw):
                x = words[c, w] & ~covered[w]
                while x:
                    total += weights[w * 64 + ctz64(x)]
                    x &= x - 1
            o[t] = total
    return out
