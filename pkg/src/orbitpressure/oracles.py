"""Slow, definition-level reference evaluators.

Nothing here shares code with the production paths in `orbit_metrics` or
`estimators`; tests and ``verify`` compare the two.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .systems import Circle, DynSystem, Symbolic


def _orbit_points(system: DynSystem, x, n: int, q: int) -> list:
    """Orbit by repeated scalar map application (no batch helpers)."""
    if system.symbolic:
        return [x.word[q * i:] for i in range(n)]
    pts = [x.x]
    cur = x.x
    for _ in range(n - 1):
        for _ in range(q):
            cur = (2.0 * cur) % 1.0 if system.kind == "doubling" else (cur + system.alpha) % 1.0
        pts.append(cur)
    return pts


def _dist(system: DynSystem, u, v) -> float:
    if system.symbolic:
        for j, (a, b) in enumerate(zip(u, v)):
            if a != b:
                return 2.0 ** -j
        return 0.0
    t = abs(u - v)
    return min(t, 1.0 - t)


def grid(system: DynSystem, x, y, n: int, q: int = 1) -> list:
    ox = _orbit_points(system, x, n, q)
    oy = _orbit_points(system, y, n, q)
    return [[_dist(system, a, b) for b in oy] for a in ox]


def brute_match_size(mask) -> int:
    """Largest order-preserving partial bijection inside ``mask`` by
    enumerating every pair of equal-size index subsets."""
    n = len(mask)
    m_cols = len(mask[0]) if n else 0
    for size in range(min(n, m_cols), 0, -1):
        for rows in itertools.combinations(range(n), size):
            for cols in itertools.combinations(range(m_cols), size):
                if all(mask[i][j] for i, j in zip(rows, cols)):
                    return size
    return 0


def memo_lcs(mask) -> int:
    """Recursive LCS over a boolean grid."""
    n = len(mask)
    m = len(mask[0]) if n else 0

    @lru_cache(maxsize=None)
    def best(i, j):
        if i == n or j == m:
            return 0
        skip = max(best(i + 1, j), best(i, j + 1))
        return max(skip, 1 + best(i + 1, j + 1)) if mask[i][j] else skip

    return best(0, 0)


def definition_fk(system: DynSystem, x, y, n: int, q: int = 1) -> float:
    """``inf { delta > 0 : F_{n,delta}(x, y) < delta }`` by scanning the
    finite candidate set of grid distances and fractions ``k / n``.

    ``F`` is constant between consecutive candidates, and every value it
    takes is itself a candidate, so the infimum is the first candidate ``c``
    whose open interval to the next candidate satisfies the predicate.
    """
    g = grid(system, x, y, n, q)
    cands = sorted({v for row in g for v in row} | {k / n for k in range(n + 1)})
    for idx, c in enumerate(cands):
        probe = (c + cands[idx + 1]) / 2 if idx + 1 < len(cands) else c + 1.0
        mask = [[v < probe for v in row] for row in g]
        f = (n - memo_lcs(tuple(map(tuple, mask)))) / n
        if f < probe:
            return c
    raise AssertionError("predicate never satisfied")  # unreachable: F = 0 above diameter


def brute_edit_distance(w1, w2, n: int) -> float:
    """``1 - k / n`` with ``k`` the longest common subsequence, by trying every
    subsequence of the first word. Returned as ``(n - k) / n``, the correctly
    rounded value of that fraction."""
    a, b = tuple(w1[:n]), tuple(w2[:n])

    def is_subseq(sub, word):
        it = iter(word)
        return all(s in it for s in sub)

    for k in range(n, 0, -1):
        for idx in itertools.combinations(range(n), k):
            if is_subseq(tuple(a[i] for i in idx), b):
                return (n - k) / n
    return 1.0


def equal_time_distances(system, x, y, n, q=1) -> list:
    g = grid(system, x, y, n, q)
    return [g[i][i] for i in range(n)]


def naive_bowen(system, x, y, n, q=1) -> float:
    return max(equal_time_distances(system, x, y, n, q))


def naive_mean(system, x, y, n, q=1) -> float:
    return math.fsum(equal_time_distances(system, x, y, n, q)) / n


def naive_maxmean(system, x, y, n, q=1) -> float:
    d = equal_time_distances(system, x, y, n, q)
    return max(math.fsum(d[:k]) / k for k in range(1, n + 1))


# ---------------------------------------------------------------------------
# closed forms

def bernoulli_cylinder_mass(p, word) -> float:
    return math.prod(p[s] for s in word)


def count_allowed_words(matrix, length: int) -> int:
    """Number of admissible words of ``length`` symbols for a 0/1 matrix,
    by brute enumeration."""
    a = np.asarray(matrix)
    k = a.shape[0]
    return sum(
        all(a[s, t] for s, t in zip(w, w[1:]))
        for w in itertools.product(range(k), repeat=length)
    )


def weighted_word_sum(matrix, table, length: int) -> float:
    """``sum_w exp(sum_i table[w_i])`` over admissible words, by enumeration."""
    a = np.asarray(matrix)
    k = a.shape[0]
    total = 0.0
    for w in itertools.product(range(k), repeat=length):
        if all(a[s, t] for s, t in zip(w, w[1:])):
            total += math.exp(sum(table[s] for s in w))
    return total


def bernoulli_entropy(p) -> float:
    return -math.fsum(v * math.log(v) for v in p if v > 0)


def markov_entropy(matrix, stationary) -> float:
    p = np.asarray(matrix, dtype=float)
    pi = np.asarray(stationary, dtype=float)
    return -math.fsum(
        pi[i] * p[i, j] * math.log(p[i, j])
        for i in range(len(pi)) for j in range(len(pi)) if p[i, j] > 0
    )


def golden_ratio_entropy() -> float:
    return math.log((1.0 + math.sqrt(5.0)) / 2.0)


def brute_min_cover(sets, weights, masses, threshold) -> float:
    """Minimum total weight over subsets whose union has mass above
    ``threshold``, by plain enumeration of index subsets."""
    m = len(sets)
    best = math.inf
    for r in range(1, m + 1):
        for combo in itertools.combinations(range(m), r):
            union = set().union(*(sets[i] for i in combo))
            if math.fsum(masses[j] for j in union) > threshold:
                best = min(best, math.fsum(weights[i] for i in combo))
    return best


__all__ = [
    "Circle",
    "Symbolic",
    "bernoulli_cylinder_mass",
    "bernoulli_entropy",
    "brute_edit_distance",
    "brute_match_size",
    "brute_min_cover",
    "count_allowed_words",
    "definition_fk",
    "golden_ratio_entropy",
    "grid",
    "markov_entropy",
    "memo_lcs",
    "naive_bowen",
    "naive_maxmean",
    "naive_mean",
    "weighted_word_sum",
]
