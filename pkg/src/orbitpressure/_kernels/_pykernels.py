"""Pure Python / numpy kernels.

Reference semantics for the compiled kernels in ``_ckernels.pyx``. Both
implementations perform the same floating point operations in the same order,
so they return identical values; the compiled one is simply faster.
"""
import math

import numpy as np

BOWEN, MEAN, MAXMEAN, FK = 0, 1, 2, 3

BACKEND = "python"


def _sym_first_diff(a, sa, b, sb):
    c = min(a.shape[0] - sa, b.shape[0] - sb)
    if c <= 0:
        return 0.0
    neq = np.flatnonzero(a[sa:sa + c] != b[sb:sb + c])
    if neq.size == 0:
        return 0.0
    return math.ldexp(1.0, -int(neq[0]))


def sym_diag(a, b, n, q):
    return np.array([_sym_first_diff(a, q * i, b, q * i) for i in range(n)])


def sym_grid(a, b, n, q):
    g = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            g[i, j] = _sym_first_diff(a, q * i, b, q * j)
    return g


def circ_diag(oa, ob):
    t = np.abs(oa - ob)
    return np.minimum(t, 1.0 - t)


def circ_grid(oa, ob):
    t = np.abs(oa[:, None] - ob[None, :])
    return np.minimum(t, 1.0 - t)


def reduce_diag(d, family):
    runmax = 0.0
    s = 0.0
    best = 0.0
    k = 0
    for v in d:
        v = float(v)
        k += 1
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
        m = s / k
        return runmax if m > runmax else m
    return best


def _reduce_many(D, family):
    """Column-sequential version of `reduce_diag` over the rows of ``D``."""
    M, n = D.shape
    runmax = np.zeros(M)
    s = np.zeros(M)
    best = np.zeros(M)
    for k in range(1, n + 1):
        v = D[:, k - 1]
        runmax = np.maximum(runmax, v)
        s = s + v
        if family == MAXMEAN:
            m = np.minimum(s / k, runmax)
            best = np.maximum(best, m)
    if family == BOWEN:
        return runmax
    if family == MEAN:
        return np.minimum(s / n, runmax)
    return best


def fk_tau(grid):
    """Bottleneck profile: ``tau[m]`` is the least possible largest grid
    value over order-preserving matchings of size ``m`` (``tau[0] = 0``)."""
    n = grid.shape[0]
    B = np.full((n + 1, n + 1, n + 1), np.inf)
    B[:, :, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            cand = np.maximum(B[i - 1, j - 1, :-1], grid[i - 1, j - 1])
            B[i, j, 1:] = np.minimum(np.minimum(B[i - 1, j, 1:], B[i, j - 1, 1:]), cand)
    return B[n, n].copy()


def lcs_mask(mask):
    """Longest order-preserving matching inside a boolean grid."""
    mask = np.asarray(mask, dtype=bool)
    n, m = mask.shape
    prev = [0] * (m + 1)
    for i in range(n):
        cur = [0] * (m + 1)
        row = mask[i]
        for j in range(1, m + 1):
            if row[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = cur[j - 1] if cur[j - 1] > prev[j] else prev[j]
        prev = cur
    return prev[m]


def _sym_pred_grid(a, b, n, q, J):
    g = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            sa, sb = q * i, q * j
            c = min(a.shape[0] - sa, b.shape[0] - sb, J)
            g[i, j] = c <= 0 or bool(np.all(a[sa:sa + c] == b[sb:sb + c]))
    return g


def sym_within_many(c, W, n, q, r, family, J, m_min):
    M = W.shape[0]
    out = np.zeros(M, dtype=np.uint8)
    if family == FK:
        for p in range(M):
            out[p] = lcs_mask(_sym_pred_grid(c, W[p], n, q, J)) >= m_min
        return out
    D = np.array([sym_diag(c, W[p], n, q) for p in range(M)]).reshape(M, n)
    return (_reduce_many(D, family) < r).astype(np.uint8)


def circ_within_many(oc, O, r, family, m_min):
    M, n = O.shape
    if family == FK:
        out = np.zeros(M, dtype=np.uint8)
        for p in range(M):
            out[p] = lcs_mask(circ_grid(oc, O[p]) < r) >= m_min
        return out
    return (_reduce_many(circ_diag(oc[None, :], O), family) < r).astype(np.uint8)


def _pack_rows(rows):
    """Bool ``(M, M)`` -> little-endian uint64 words ``(M, ceil(M/64))``."""
    M, N = rows.shape
    nw = (N + 63) // 64
    packed = np.packbits(rows, axis=1, bitorder="little")
    padded = np.zeros((M, nw * 8), dtype=np.uint8)
    padded[:, :packed.shape[1]] = packed
    return padded.view("<u8").astype(np.uint64)


def sym_ball_words(W, n, q, r, family, J, m_min):
    rows = np.array([sym_within_many(W[p], W, n, q, r, family, J, m_min) for p in range(W.shape[0])])
    return _pack_rows(rows.astype(bool))


def circ_ball_words(O, r, family, m_min):
    rows = np.array([circ_within_many(O[p], O, r, family, m_min) for p in range(O.shape[0])])
    return _pack_rows(rows.astype(bool))


def _unpack_row(words, N):
    return np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")[:N].astype(bool)


def row_gains(words, rows, covered, weights):
    N = weights.shape[0]
    free = ~_unpack_row(covered, N)
    out = np.zeros(len(rows))
    for t, c in enumerate(rows):
        sel = weights[_unpack_row(words[c], N) & free]
        if sel.size:
            out[t] = np.cumsum(sel)[-1]
    return out
