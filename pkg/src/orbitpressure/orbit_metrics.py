"""Orbit (pseudo)metrics: Bowen, mean, max-mean and Feldman-Katok.

All four families compare the ``q``-step orbits ``x, T^q x, ..., T^{q(n-1)} x``
of two points:

* Bowen ``d_n^q``: the largest base distance at equal times;
* mean ``dbar_n^q``: the average base distance at equal times;
* max-mean ``dhat_n^q``: the largest prefix average ``dbar_k^q``, ``k <= n``;
* Feldman-Katok ``d_FK_n^q``: the infimum of ``delta`` for which an
  order-preserving matching of time indices, pairing only orbit points closer
  than ``delta``, leaves fewer than ``delta * n`` indices unmatched.

The FK infimum is evaluated exactly as ``min_m max(tau_m, (n - m) / n)``,
where ``tau_m`` is the smallest achievable largest distance over matchings of
size ``m`` (a bottleneck LCS profile).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import FAMILY_CODES
from .errors import HorizonExhausted, LengthTooShort
from .systems import (
    Circle,
    DynSystem,
    Point,
    Symbolic,
    _check_kind,
    check_horizon,
    circle_orbits,
    symbols_to_agree,
)

FAMILIES = ("bowen", "mean", "maxmean", "fk")

# Fault-injection hook used by ``verify --inject-fault``: when False, matches
# accept pairs at distance <= delta instead of < delta.
_MATCH_STRICT = True


@dataclass(frozen=True)
class MatchParams:
    n: int
    q: int
    delta: float

    def __post_init__(self):
        if self.n < 1 or self.q < 1:
            raise ValueError("n and q must be >= 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class MatchResult:
    size: int
    pairs: tuple


@dataclass(frozen=True)
class MetricKind:
    family: str
    q: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown metric family {self.family!r}")
        if self.q < 1:
            raise ValueError("q must be >= 1")

    def __str__(self):
        return self.family if self.q == 1 else f"{self.family}^{self.q}"

    @classmethod
    def parse(cls, text: str) -> "MetricKind":
        family, _, q = text.strip().lower().partition("^")
        return cls(family, int(q) if q else 1)


# ---------------------------------------------------------------------------
# orbit data

def _word(x: Symbolic) -> np.ndarray:
    return np.asarray(x.word, dtype=np.uint8)


def _orbit_row(system: DynSystem, x: Point, n: int, q: int) -> np.ndarray:
    return circle_orbits(system, np.array([x.x]), n, q)[0]


def _prepare(system, x, y, n, q):
    _check_kind(system, x, y)
    if n < 1 or q < 1:
        raise ValueError("n and q must be >= 1")
    if system.symbolic:
        for p in (x, y):
            if (n - 1) * q >= len(p.word):
                raise HorizonExhausted(
                    f"word of length {len(p.word)} cannot be shifted {(n - 1) * q} times"
                )
        return _word(x), _word(y)
    return _orbit_row(system, x, n, q), _orbit_row(system, y, n, q)


def diag_distances(system: DynSystem, x: Point, y: Point, n: int, q: int = 1) -> np.ndarray:
    """``d(T^{qi} x, T^{qi} y)`` for ``i < n``."""
    a, b = _prepare(system, x, y, n, q)
    if system.symbolic:
        return _kernels.backend.sym_diag(a, b, n, q)
    return _kernels.backend.circ_diag(a, b)


def distance_grid(system: DynSystem, x: Point, y: Point, n: int, q: int = 1) -> np.ndarray:
    """``n x n`` grid ``d(T^{qi} x, T^{qj} y)``."""
    a, b = _prepare(system, x, y, n, q)
    if system.symbolic:
        return _kernels.backend.sym_grid(a, b, n, q)
    return _kernels.backend.circ_grid(a, b)


# ---------------------------------------------------------------------------
# equal-time families

def bowen_distance(system, x, y, n, q=1) -> float:
    return _kernels.backend.reduce_diag(diag_distances(system, x, y, n, q), 0)


def mean_distance(system, x, y, n, q=1) -> float:
    """Average of the ``n`` equal-time base distances.

    The running sum is capped by the running maximum so that rounding can
    never push a mean above the corresponding Bowen value.
    """
    return _kernels.backend.reduce_diag(diag_distances(system, x, y, n, q), 1)


def maxmean_distance(system, x, y, n, q=1) -> float:
    """Largest prefix mean, computed in one pass over running sums."""
    return _kernels.backend.reduce_diag(diag_distances(system, x, y, n, q), 2)


# ---------------------------------------------------------------------------
# matches and Feldman-Katok

def _match_mask(grid: np.ndarray, delta: float) -> np.ndarray:
    return grid < delta if _MATCH_STRICT else grid <= delta


def lcs_with_witness(mask: np.ndarray) -> MatchResult:
    """Maximum order-preserving matching inside a boolean grid, with one
    optimal matching recovered by backtracking."""
    mask = np.asarray(mask, dtype=bool)
    n, m = mask.shape
    dp = np.zeros((n + 1, m + 1), dtype=np.int64)
    for i in range(1, n + 1):
        row = mask[i - 1]
        for j in range(1, m + 1):
            if row[j - 1]:
                dp[i, j] = dp[i - 1, j - 1] + 1
            else:
                dp[i, j] = max(dp[i - 1, j], dp[i, j - 1])
    pairs = []
    i, j = n, m
    while i > 0 and j > 0:
        if mask[i - 1, j - 1] and dp[i, j] == dp[i - 1, j - 1] + 1:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif dp[i - 1, j] >= dp[i, j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return MatchResult(int(dp[n, m]), tuple(pairs))


def match_value(system: DynSystem, x: Point, y: Point, params: MatchParams):
    """Return ``(F, witness)`` with ``F = 1 - |pi*| / n`` for a largest
    ``(q, n, delta)``-match ``pi*``.

    ``F`` is computed as ``(n - |pi*|) / n`` so that it is bit-identical to the
    fractions ``k / n`` used by `fk_distance`.
    """
    grid = distance_grid(system, x, y, params.n, params.q)
    witness = lcs_with_witness(_match_mask(grid, params.delta))
    return (params.n - witness.size) / params.n, witness


def min_match_size(n: int, r: float) -> int:
    """Smallest ``m`` with ``(n - m) / n < r``."""
    for m in range(n + 1):
        if (n - m) / n < r:
            return m
    return n + 1


def fk_profile(system, x, y, n, q=1) -> np.ndarray:
    """Bottleneck profile ``tau[0..n]`` of the orbit distance grid."""
    return _kernels.backend.fk_tau(np.ascontiguousarray(distance_grid(system, x, y, n, q)))


def fk_from_profile(tau: np.ndarray) -> float:
    n = len(tau) - 1
    best = 1.0
    for m in range(n + 1):
        v = max(float(tau[m]), (n - m) / n)
        if v < best:
            best = v
    return best


def fk_distance(system: DynSystem, x: Point, y: Point, n: int, q: int = 1) -> float:
    """Finite-horizon Feldman-Katok distance ``d_FK_n^q(x, y)``."""
    return fk_from_profile(fk_profile(system, x, y, n, q))


def edit_distance(w1, w2, n: int) -> float:
    """``1 - LCS(w1[:n], w2[:n]) / n``."""
    w1, w2 = list(w1), list(w2)
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(w1) < n or len(w2) < n:
        raise LengthTooShort(f"words of lengths {len(w1)}, {len(w2)} are shorter than n={n}")
    mask = np.equal.outer(np.asarray(w1[:n]), np.asarray(w2[:n]))
    return (n - _kernels.backend.lcs_mask(mask)) / n


_DISPATCH = {
    "bowen": bowen_distance,
    "mean": mean_distance,
    "maxmean": maxmean_distance,
    "fk": fk_distance,
}


def orbit_distance(system: DynSystem, x: Point, y: Point, n: int, kind: MetricKind) -> float:
    return _DISPATCH[kind.family](system, x, y, n, kind.q)


def default_workers() -> int:
    env = os.environ.get("ORBIT_PRESSURE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def pairwise_distances(system, points, n, kind: MetricKind, workers=None) -> np.ndarray:
    """Symmetric matrix of `orbit_distance` over a point list.

    Rows are evaluated concurrently when ``workers > 1``; the result is
    identical to sequential evaluation.
    """
    points = list(points)
    size = len(points)

    def row(i):
        return [orbit_distance(system, points[i], points[j], n, kind) for j in range(i + 1, size)]

    workers = workers or default_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(size)))
    else:
        rows = [row(i) for i in range(size)]
    out = np.zeros((size, size))
    for i, vals in enumerate(rows):
        out[i, i + 1:] = vals
        out[i + 1:, i] = vals
    return out


# ---------------------------------------------------------------------------
# batch ball membership

def _batch_args(system, data, n, q, r):
    if not r > 0:
        raise ValueError("radius must be positive")
    if system.symbolic:
        check_horizon(system, data.shape[1], n, q, r)
        return np.ascontiguousarray(data, dtype=np.uint8)
    return np.ascontiguousarray(circle_orbits(system, data, n, q))


def within_mask(system: DynSystem, center: Point, data: np.ndarray, n: int, kind: MetricKind,
                radius: float) -> np.ndarray:
    """Boolean mask of the rows of ``data`` at orbit distance ``< radius``
    from ``center``."""
    code = FAMILY_CODES[kind.family]
    q = kind.q
    rows = _batch_args(system, data, n, q, radius)
    m_min = min_match_size(n, radius)
    if system.symbolic:
        _check_kind(system, center)
        c = _word(center)
        check_horizon(system, len(c), n, q, radius)
        out = _kernels.backend.sym_within_many(
            c, rows, n, q, radius, code, symbols_to_agree(radius), m_min
        )
    else:
        _check_kind(system, center)
        oc = np.ascontiguousarray(_orbit_row(system, center, n, q))
        out = _kernels.backend.circ_within_many(oc, rows, radius, code, m_min)
    return out.astype(bool)


def ball_words(system: DynSystem, data: np.ndarray, n: int, kind: MetricKind, radius: float) -> np.ndarray:
    """All-pairs ball membership packed as little-endian uint64 bit rows:
    bit ``j`` of row ``i`` is set when ``d(x_i, x_j) < radius``."""
    code = FAMILY_CODES[kind.family]
    rows = _batch_args(system, data, n, kind.q, radius)
    m_min = min_match_size(n, radius)
    if system.symbolic:
        return _kernels.backend.sym_ball_words(
            rows, n, kind.q, radius, code, symbols_to_agree(radius), m_min
        )
    return _kernels.backend.circ_ball_words(rows, radius, code, m_min)


__all__ = [
    "Circle",
    "FAMILIES",
    "MatchParams",
    "MatchResult",
    "MetricKind",
    "ball_words",
    "bowen_distance",
    "diag_distances",
    "distance_grid",
    "edit_distance",
    "fk_distance",
    "fk_from_profile",
    "fk_profile",
    "lcs_with_witness",
    "match_value",
    "maxmean_distance",
    "mean_distance",
    "min_match_size",
    "orbit_distance",
    "pairwise_distances",
    "within_mask",
]
