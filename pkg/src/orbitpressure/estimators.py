"""Covering quantities, spanning-set pressure and closed-form oracles.

Every estimate is ``(1/n) log W`` for the total exponential Birkhoff weight
``W`` of a family of ball centers. Centers are restricted to a finite
candidate set (the sample points of an empirical measure, or a grid standing
in for the whole space). Choosing the cheapest family is weighted partial set
cover; the default is the greedy ratio rule, with exhaustive search as the
small-instance oracle.
"""
from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .errors import (
    ExactTooLarge,
    GridTooCoarse,
    Infeasible,
    NotPrimitive,
    OrbitPressureError,
    ProblemTooLarge,
)
from .measures import EmpiricalMeasure, MeasureSpec, entropy_of, sample_measure
from .orbit_metrics import MetricKind, ball_words, default_workers, min_match_size, within_mask
from .systems import (
    CIRCLE_CALLBACKS,
    DynSystem,
    Potential,
    birkhoff_many,
    depth_needed,
    point_at,
    symbols_to_agree,
)

EXACT_CAP = 20
MAX_BITSET_BYTES = 768 * 2 ** 20
MAX_GRID_POINTS = 2 ** 22
Q_MAX_DEFAULT = 8

GREEDY = "greedy"
EXACT = "exact"


# ---------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class CoverSolution:
    """Chosen centers (as indices into the candidate array and as points),
    their total weight ``sum exp(S_n^q phi(x_i))`` and the mass they cover."""

    indices: tuple
    total_weight: float
    log_total_weight: float
    covered_mass: float
    method: str
    system: DynSystem = field(default=None, repr=False, compare=False)
    candidates: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def centers(self) -> tuple:
        return tuple(point_at(self.system, self.candidates, i) for i in self.indices)


@dataclass(frozen=True)
class PressureEstimate:
    value: float
    n: int
    eps: float
    q: int
    kind: MetricKind
    variant: str
    system: str
    potential: str
    seed: Optional[int] = None
    measure: str = ""
    M: int = 0
    method: str = GREEDY
    covered_mass: float = float("nan")
    centers: int = 0
    per_q: tuple = ()


def _logsumexp(logs: Sequence[float]) -> float:
    logs = list(logs)
    top = max(logs)
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


# ---------------------------------------------------------------------------
# ball structures

class _Partition:
    """Balls that are the classes of an equivalence relation."""

    def __init__(self, labels: np.ndarray):
        self.labels = labels
        self.size = labels.shape[0]

    def member_mask(self, i: int) -> np.ndarray:
        return self.labels == self.labels[i]


class _Bitset:
    """All-pairs membership as packed uint64 rows."""

    def __init__(self, words: np.ndarray, size: int):
        self.words = words
        self.size = size

    def member_mask(self, i: int) -> np.ndarray:
        return _unpack(self.words[i], self.size)


def _unpack(row: np.ndarray, size: int) -> np.ndarray:
    return np.unpackbits(row.view(np.uint8), bitorder="little")[:size].astype(bool)


def _partition_positions(n: int, q: int, J: int, length: int) -> np.ndarray:
    pos = sorted({q * i + t for i in range(n) for t in range(J) if q * i + t < length})
    return np.asarray(pos, dtype=np.int64)


def _labels_of(data: np.ndarray, pos: np.ndarray) -> np.ndarray:
    sub = np.ascontiguousarray(data[:, pos])
    if sub.shape[1] == 0:
        return np.zeros(data.shape[0], dtype=np.int64)
    view = sub.view(np.dtype((np.void, sub.shape[1])))[:, 0]
    _, labels = np.unique(view, return_inverse=True)
    return labels.reshape(-1).astype(np.int64)


def uses_partition(system: DynSystem, n: int, kind: MetricKind, eps: float) -> bool:
    """Symbolic Bowen balls are cylinders, hence classes of a partition; FK
    balls coincide with them when no index may be left unmatched."""
    if not system.symbolic:
        return False
    return kind.family == "bowen" or (kind.family == "fk" and min_match_size(n, eps) == n)


def ball_structure(system: DynSystem, data: np.ndarray, n: int, kind: MetricKind, eps: float):
    if uses_partition(system, n, kind, eps):
        from .systems import check_horizon

        check_horizon(system, data.shape[1], n, kind.q, eps)
        pos = _partition_positions(n, kind.q, symbols_to_agree(eps), data.shape[1])
        return _Partition(_labels_of(data, pos))
    m = data.shape[0]
    need = m * ((m + 63) // 64) * 8
    if need > MAX_BITSET_BYTES:
        raise ProblemTooLarge(
            f"all-pairs {kind} balls over {m} points need {need / 2 ** 20:.0f} MiB; reduce M"
        )
    return _Bitset(ball_words(system, data, n, kind, eps), m)


# ---------------------------------------------------------------------------
# solvers

def _greedy_partition(part: _Partition, logw: np.ndarray, masses: np.ndarray, threshold: float):
    labels = part.labels
    ncls = int(labels.max()) + 1
    cls_mass = np.bincount(labels, weights=masses, minlength=ncls)
    order = np.lexsort((np.arange(labels.size), logw))
    # first hit per class = cheapest center, lowest index on ties
    _, first = np.unique(labels[order], return_index=True)
    best = order[first]
    live = cls_mass > 0
    cls = np.flatnonzero(live)
    best = best[live]
    keys = logw[best] - np.log(cls_mass[cls])
    rank = np.lexsort((best, keys))
    cls, best = cls[rank], best[rank]
    running = np.cumsum(cls_mass[cls])
    start = int(np.searchsorted(running, threshold, side="right"))
    for stop in range(start, len(cls)):
        hit = np.zeros(ncls, dtype=bool)
        hit[cls[:stop + 1]] = True
        if math.fsum(masses[hit[labels]]) > threshold:
            return best[:stop + 1].tolist()
    raise Infeasible("all candidate balls together do not cover enough mass")


def _greedy_bitset(bits: _Bitset, logw: np.ndarray, masses: np.ndarray, threshold: float):
    kern = _kernels.backend
    m = bits.size
    covered = np.zeros(bits.words.shape[1], dtype=np.uint64)
    gains = kern.row_gains(bits.words, np.arange(m, dtype=np.int64), covered, masses)
    heap = [(float(logw[i]) - math.log(g), i) for i, g in enumerate(gains) if g > 0]
    heapq.heapify(heap)
    chosen, running = [], 0.0
    while heap:
        key, i = heapq.heappop(heap)
        g = kern.row_gains(bits.words, np.array([i], dtype=np.int64), covered, masses)[0]
        if g <= 0:
            continue
        fresh = (float(logw[i]) - math.log(g), i)
        if heap and fresh > heap[0]:
            heapq.heappush(heap, fresh)
            continue
        chosen.append(i)
        covered |= bits.words[i]
        running += g
        if running > threshold:
            if math.fsum(masses[_unpack(covered, m)]) > threshold:
                return chosen
    raise Infeasible("all candidate balls together do not cover enough mass")


def _exact(struct, logw: np.ndarray, masses: np.ndarray, threshold: float):
    m = struct.size
    if m > EXACT_CAP:
        raise ExactTooLarge(f"exhaustive cover is limited to {EXACT_CAP} candidates, got {m}")
    ball = [int(np.dot(struct.member_mask(i).astype(np.int64), 1 << np.arange(m, dtype=np.int64)))
            for i in range(m)]
    full = 1 << m
    union = np.zeros(full, dtype=np.int64)
    weight = np.zeros(full)
    w = np.exp(logw)
    for i in range(m):
        lo, hi = 1 << i, 1 << (i + 1)
        union[lo:hi] = union[:lo] | ball[i]
        weight[lo:hi] = weight[:lo] + w[i]
    mass = np.zeros(full)
    for j in range(m):
        mass = mass + masses[j] * ((union >> j) & 1)
    feasible = np.flatnonzero(mass > threshold)
    if feasible.size == 0:
        raise Infeasible("all candidate balls together do not cover enough mass")
    for s in feasible[np.lexsort((feasible, weight[feasible]))]:
        chosen = [i for i in range(m) if (int(s) >> i) & 1]
        covered = union[s]
        if math.fsum(masses[j] for j in range(m) if (int(covered) >> j) & 1) > threshold:
            return chosen
    raise Infeasible("no subset clears the mass threshold under exact summation")


def _covered_by(struct, chosen) -> np.ndarray:
    if isinstance(struct, _Partition):
        hit = np.zeros(int(struct.labels.max()) + 1, dtype=bool)
        hit[struct.labels[chosen]] = True
        return hit[struct.labels]
    words = np.zeros(struct.words.shape[1], dtype=np.uint64)
    for i in chosen:
        words |= struct.words[i]
    return _unpack(words, struct.size)


def _solve(system, data, n, kind, eps, logw, masses, threshold, method) -> CoverSolution:
    if method not in (GREEDY, EXACT):
        raise ValueError(f"unknown method {method!r}")
    if method == EXACT and data.shape[0] > EXACT_CAP:
        raise ExactTooLarge(f"exhaustive cover is limited to {EXACT_CAP} candidates, got {data.shape[0]}")
    struct = ball_structure(system, data, n, kind, eps)
    if method == EXACT:
        chosen = _exact(struct, logw, masses, threshold)
    elif isinstance(struct, _Partition):
        chosen = _greedy_partition(struct, logw, masses, threshold)
    else:
        chosen = _greedy_bitset(struct, logw, masses, threshold)
    chosen = sorted(chosen)
    covered = _covered_by(struct, chosen)
    logs = [float(logw[i]) for i in chosen]
    return CoverSolution(
        indices=tuple(chosen),
        system=system,
        candidates=data,
        total_weight=math.fsum(math.exp(v) for v in logs),
        log_total_weight=_logsumexp(logs),
        covered_mass=math.fsum(masses[covered]),
        method=method,
    )


def check_cover(solution: CoverSolution, system: DynSystem, phi: Potential, data: np.ndarray,
                n: int, q: int, eps: float, kind: MetricKind, masses: np.ndarray,
                threshold: float) -> None:
    """Re-verify a cover through the per-center membership kernel, which is
    independent of the all-pairs structures the solvers use."""
    covered = np.zeros(data.shape[0], dtype=bool)
    for c in solution.centers:
        covered |= within_mask(system, c, data, n, kind, eps)
    mass = math.fsum(masses[covered])
    if not mass > threshold:
        raise AssertionError(f"cover reaches mass {mass!r}, needs > {threshold!r}")
    logs = birkhoff_many(system, phi, data[list(solution.indices)], n, q) if solution.indices else []
    expect = math.fsum(math.exp(v) for v in logs)
    if abs(expect - solution.total_weight) > 1e-9 * max(expect, 1e-300):
        raise AssertionError("total weight disagrees with the Birkhoff sums of the centers")


# ---------------------------------------------------------------------------
# measure-theoretic covers

def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")


def covering_weight(system: DynSystem, phi: Potential, mu: EmpiricalMeasure, n: int, q: int,
                    eps: float, kind: MetricKind, method: str = GREEDY) -> CoverSolution:
    """Cheapest found family of sample points whose ``eps``-balls capture
    sample mass ``> 1 - eps``."""
    _check_eps(eps)
    kind = MetricKind(kind.family, q)
    logw = birkhoff_many(system, phi, mu.data, n, q)
    return _solve(system, mu.data, n, kind, eps, logw, np.asarray(mu.weights), 1.0 - eps, method)


def _seed_of(mu: EmpiricalMeasure):
    return getattr(mu.provenance, "seed", None)


def _measure_name(mu: EmpiricalMeasure) -> str:
    spec = getattr(mu.provenance, "spec", None)
    return spec.name if spec is not None else str(mu.provenance)


def measure_pressure_estimate(system: DynSystem, phi: Potential, mu: EmpiricalMeasure, n: int, q: int,
                              eps: float, kind: MetricKind, method: str = GREEDY) -> PressureEstimate:
    sol = covering_weight(system, phi, mu, n, q, eps, kind, method)
    return PressureEstimate(
        value=sol.log_total_weight / n, n=n, eps=eps, q=q, kind=MetricKind(kind.family, q),
        variant="measure", system=system.name, potential=phi.name, seed=_seed_of(mu),
        measure=_measure_name(mu), M=mu.size, method=method,
        covered_mass=sol.covered_mass, centers=sol.size,
    )


# ---------------------------------------------------------------------------
# topological covers

def _allowed_words(system: DynSystem, length: int) -> np.ndarray:
    a = system.transition_matrix().astype(bool)
    words = np.arange(system.k, dtype=np.uint8)[:, None]
    for _ in range(length - 1):
        rows, syms = np.nonzero(a[words[:, -1]])
        if rows.size > MAX_GRID_POINTS:
            raise ProblemTooLarge(f"grid of admissible {length}-words exceeds {MAX_GRID_POINTS} points")
        words = np.hstack([words[rows], syms.astype(np.uint8)[:, None]])
    return np.ascontiguousarray(words)


def circle_grid_size(system: DynSystem, n: int, q: int, eps: float) -> int:
    """Smallest uniform grid size whose points are ``eps/2``-dense for the
    Bowen metric ``d_n^q`` (expansion factor ``2`` per doubling step)."""
    stretch = 2.0 ** ((n - 1) * q) if system.kind == "doubling" else 1.0
    return math.ceil(stretch / eps)


def builtin_grid(system: DynSystem, n: int, q: int, eps: float, depth: int = None,
                 size: int = None) -> np.ndarray:
    """Finite ``eps/2``-dense stand-in for the whole space.

    Shifts: every admissible word of ``n q + depth`` symbols. Circle maps:
    ``size`` equally spaced points.
    """
    if system.symbolic:
        need = depth_needed(eps)
        depth = need if depth is None else depth
        if depth < need:
            raise GridTooCoarse(f"look-ahead {depth} < {need} symbols required for eps={eps!r}")
        length = n * q + depth
        if system.k ** length > MAX_GRID_POINTS and system.kind == "fullshift":
            raise ProblemTooLarge(f"{system.k}^{length} grid points exceed {MAX_GRID_POINTS}")
        return _allowed_words(system, length)
    need = circle_grid_size(system, n, q, eps)
    size = need if size is None else size
    if size < need:
        raise GridTooCoarse(f"{size} grid points < {need} required for eps={eps!r}")
    if size > MAX_GRID_POINTS:
        raise ProblemTooLarge(f"{size} grid points exceed {MAX_GRID_POINTS}")
    return np.arange(size, dtype=np.float64) / size


def topological_cover_weight(system: DynSystem, phi: Potential, n: int, q: int, eps: float,
                             kind: MetricKind, grid: np.ndarray = None,
                             method: str = GREEDY) -> CoverSolution:
    """Cheapest found family of grid points whose ``eps``-balls cover the
    whole grid."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    kind = MetricKind(kind.family, q)
    data = builtin_grid(system, n, q, eps) if grid is None else np.asarray(grid)
    logw = birkhoff_many(system, phi, data, n, q)
    ones = np.ones(data.shape[0])
    sol = _solve(system, data, n, kind, eps, logw, ones, data.shape[0] - 0.5, method)
    return replace(sol, covered_mass=sol.covered_mass / data.shape[0])


def topological_estimate(system, phi, n, q, eps, kind, grid=None, method=GREEDY,
                         variant="topological") -> PressureEstimate:
    sol = topological_cover_weight(system, phi, n, q, eps, kind, grid, method)
    return PressureEstimate(
        value=sol.log_total_weight / n, n=n, eps=eps, q=q, kind=MetricKind(kind.family, q),
        variant=variant, system=system.name, potential=phi.name, method=method,
        covered_mass=sol.covered_mass, centers=sol.size,
        M=0 if grid is None else len(grid),
    )


def spanning_pressure(system: DynSystem, phi: Potential, n: int, eps: float,
                      grid: np.ndarray = None, method: str = GREEDY) -> PressureEstimate:
    """Weighted ``(n, eps)``-spanning estimate under the Bowen metric ``d_n``."""
    return topological_estimate(system, phi, n, 1, eps, MetricKind("bowen"), grid, method,
                                variant="spanning")


# ---------------------------------------------------------------------------
# infimum over q

def inf_over_q(system: DynSystem, phi: Potential, target, n: int, eps: float, family: str,
               Q_max: int = Q_MAX_DEFAULT, method: str = GREEDY) -> PressureEstimate:
    """Minimum of the per-``q`` estimates for ``q = 1..Q_max``.

    ``target`` is an `EmpiricalMeasure` (measure-theoretic covers) or
    ``None`` (topological covers of the built-in grid). The returned record
    carries the argmin in ``q`` and every per-``q`` value.
    """
    if Q_max < 1:
        raise ValueError("Q_max must be >= 1")
    ests = []
    for q in range(1, Q_max + 1):
        if target is None:
            ests.append(topological_estimate(system, phi, n, q, eps, MetricKind(family, q), None, method))
        else:
            ests.append(measure_pressure_estimate(system, phi, target, n, q, eps, MetricKind(family, q), method))
    best = min(ests, key=lambda e: (e.value, e.q))
    return replace(best, per_q=tuple((e.q, e.value) for e in ests))


# ---------------------------------------------------------------------------
# closed forms

def exact_shift_pressure(k: int, matrix=None, table: Sequence[float] = None, tol: float = 1e-10,
                         max_iter: int = 100_000) -> float:
    """Topological pressure of a potential depending on the first symbol.

    Full shift: ``log sum_a exp(phi(a))``. Subshift of finite type:
    ``log`` of the Perron root of ``diag(exp(phi)) A`` by power iteration.
    """
    table = [0.0] * k if table is None else [float(v) for v in table]
    if len(table) != k:
        raise ValueError("potential table must have one entry per symbol")
    if matrix is None:
        return _logsumexp(table)
    a = np.asarray(matrix, dtype=float)
    if a.shape != (k, k):
        raise ValueError("transition matrix must be k x k")
    # Wielandt: A is primitive iff A^((k-1)^2 + 1) > 0. A periodic matrix can
    # still make power iteration settle when it starts on an eigenvector.
    reach = a > 0
    for _ in range((k - 1) ** 2):
        reach = (reach.astype(np.int64) @ (a > 0).astype(np.int64)) > 0
    if not reach.all():
        raise NotPrimitive("transition matrix is not primitive")
    top = max(table)
    b = np.exp(np.asarray(table) - top)[:, None] * a
    x = np.full(k, 1.0 / k)
    lam = 0.0
    for _ in range(max_iter):
        y = b @ x
        s = y.sum()
        if s <= 0:
            break
        y = y / s
        if abs(s - lam) <= tol * s and np.abs(y - x).max() <= tol:
            return math.log(s) + top
        x, lam = y, s
    raise NotPrimitive("power iteration did not converge; the transition matrix is not primitive")


def potential_integral(phi: Potential, spec: MeasureSpec) -> float:
    """``int phi dmu`` for a built-in measure."""
    if phi.kind == "zero":
        return 0.0
    if phi.kind == "constant":
        return phi.value
    if phi.kind == "first_symbol":
        probs = spec.p if spec.kind == "bernoulli" else spec.stationary
        return math.fsum(p * v for p, v in zip(probs, phi.table))
    return CIRCLE_CALLBACKS[phi.callback].integral + phi.offset


def measure_pressure_oracle(system: DynSystem, phi: Potential, spec: MeasureSpec) -> float:
    """``h_mu + int phi dmu`` in closed form."""
    return entropy_of(spec, system) + potential_integral(phi, spec)


def topological_pressure_oracle(system: DynSystem, phi: Potential) -> Optional[float]:
    """Exact pressure when a closed form is available, else ``None``."""
    if system.symbolic:
        if phi.kind in ("zero", "constant"):
            base = exact_shift_pressure(system.k, None if system.kind == "fullshift" else system.transitions)
            return base + (phi.value if phi.kind == "constant" else 0.0)
        if phi.kind == "first_symbol":
            return exact_shift_pressure(system.k, None if system.kind == "fullshift" else system.transitions,
                                        phi.table)
        return None
    if phi.kind in ("zero", "constant"):
        c = phi.value if phi.kind == "constant" else 0.0
        return (math.log(2.0) if system.kind == "doubling" else 0.0) + c
    return None


# ---------------------------------------------------------------------------
# convergence tables

VARIANTS = ("measure", "topological", "spanning")


@dataclass(frozen=True)
class TableSpec:
    variant: str
    system: DynSystem
    potential: Potential
    n_list: tuple
    eps_list: tuple
    kinds: tuple = (MetricKind("bowen"),)
    measure: Optional[MeasureSpec] = None
    M: int = 0
    seed: Optional[int] = None
    method: str = GREEDY

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.n_list or not self.eps_list or not self.kinds:
            raise ValueError("n, eps and kind lists must be non-empty")
        if self.variant == "measure" and (self.measure is None or self.M < 1 or self.seed is None):
            raise ValueError("measure tables need a measure, M >= 1 and a seed")


@dataclass(frozen=True)
class Cell:
    kind: MetricKind
    eps: float
    n: int
    estimate: Optional[PressureEstimate]
    error: str = ""
    walltime_ms: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.estimate is not None


@dataclass(frozen=True)
class Summary:
    """Per ``(kind, eps)`` diagnostics over the computed ``n`` grid."""

    kind: MetricKind
    eps: float
    n_used: tuple
    stabilized: float
    drift_corrected: float
    oracle: Optional[float]

    @property
    def gap(self) -> float:
        return float("nan") if self.oracle is None else abs(self.drift_corrected - self.oracle)


@dataclass
class TableResult:
    spec: TableSpec
    cells: list
    summaries: list
    extrapolation: list = field(default_factory=list)
    oracle: Optional[float] = None


def drift_corrected(n_prev: int, v_prev: float, n: int, v: float) -> float:
    """Remove a ``C / n`` term: if ``v_n = P + C / n`` exactly, the result
    is ``P``."""
    return (n * v - n_prev * v_prev) / (n - n_prev)


def _cell(spec: TableSpec, mu, kind: MetricKind, eps: float, n: int, timed: bool) -> Cell:
    t0 = time.perf_counter()
    try:
        if spec.variant == "measure":
            est = measure_pressure_estimate(spec.system, spec.potential, mu, n, kind.q, eps, kind, spec.method)
        elif spec.variant == "spanning":
            est = spanning_pressure(spec.system, spec.potential, n, eps, method=spec.method)
        else:
            est = topological_estimate(spec.system, spec.potential, n, kind.q, eps, kind, method=spec.method)
    except OrbitPressureError as exc:
        return Cell(kind, eps, n, None, exc.code)
    ms = (time.perf_counter() - t0) * 1000.0 if timed else float("nan")
    return Cell(kind, eps, n, est, "", ms)


def _kind_key(kind: MetricKind):
    from .orbit_metrics import FAMILIES

    return (FAMILIES.index(kind.family), kind.q)


def convergence_table(spec: TableSpec, workers: int = None, timed: bool = False) -> TableResult:
    """One estimate per ``(kind, eps, n)`` cell plus stabilization summaries.

    For each ``(kind, eps)`` the two largest successful ``n`` give the
    stabilized value (their average) and the drift-corrected value (see
    `drift_corrected`). The extrapolation rows report the finest ``eps``
    only; nothing is extrapolated beyond the computed grid.
    """
    mu = None
    if spec.variant == "measure":
        mu = sample_measure(spec.measure, spec.system, spec.M, spec.seed)
    kinds = sorted(set(spec.kinds), key=_kind_key)
    if spec.variant == "spanning":
        kinds = [MetricKind("bowen")]
    eps_list = sorted(set(spec.eps_list), reverse=True)
    n_list = sorted(set(spec.n_list))
    jobs = [(k, e, n) for k in kinds for e in eps_list for n in n_list]
    workers = workers or default_workers()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(lambda j: _cell(spec, mu, *j, timed), jobs))
    else:
        cells = [_cell(spec, mu, *j, timed) for j in jobs]

    if spec.variant == "measure":
        oracle = measure_pressure_oracle(spec.system, spec.potential, spec.measure)
    else:
        oracle = topological_pressure_oracle(spec.system, spec.potential)

    summaries = []
    for k in kinds:
        for e in eps_list:
            good = [c for c in cells if c.kind == k and c.eps == e and c.ok]
            if not good:
                continue
            if len(good) == 1:
                v = good[0].estimate.value
                summaries.append(Summary(k, e, (good[0].n,), v, v, oracle))
                continue
            a, b = good[-2], good[-1]
            va, vb = a.estimate.value, b.estimate.value
            summaries.append(Summary(k, e, (a.n, b.n), (va + vb) / 2.0,
                                     drift_corrected(a.n, va, b.n, vb), oracle))
    finest = min(eps_list)
    extrap = [s for s in summaries if s.eps == finest]
    return TableResult(spec, cells, summaries, extrap, oracle)
