"""Finite samples standing in for ergodic measures, and ball-mass queries."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import EmptyBall, HorizonExhausted, SpecMismatch
from .orbit_metrics import MetricKind, within_mask
from .systems import Circle, DynSystem, Point, Symbolic, _check_kind, as_array, point_at

TOL_SUM = 1e-12
TOL_STATIONARY = 1e-9


# ---------------------------------------------------------------------------
# specs

@dataclass(frozen=True)
class MeasureSpec:
    """``bernoulli`` (probability vector ``p``), ``markov`` (stochastic
    ``matrix`` with ``stationary`` vector) or ``lebesgue``."""

    kind: str
    p: tuple = ()
    matrix: tuple = ()
    stationary: tuple = ()

    def __post_init__(self):
        if self.kind == "bernoulli":
            p = np.asarray(self.p, dtype=float)
            if p.ndim != 1 or p.size == 0 or (p < 0).any() or abs(math.fsum(p) - 1.0) > TOL_SUM:
                raise ValueError("bernoulli weights must form a probability vector")
            object.__setattr__(self, "p", tuple(float(v) for v in p))
        elif self.kind == "markov":
            a = np.asarray(self.matrix, dtype=float)
            if a.ndim != 2 or a.shape[0] != a.shape[1] or (a < 0).any():
                raise ValueError("markov matrix must be square and nonnegative")
            if any(abs(math.fsum(row) - 1.0) > TOL_SUM for row in a):
                raise ValueError("markov matrix rows must sum to 1")
            pi = stationary_vector(a) if not self.stationary else np.asarray(self.stationary, dtype=float)
            if pi.shape != (a.shape[0],) or (pi < 0).any() or abs(math.fsum(pi) - 1.0) > TOL_SUM:
                raise ValueError("stationary vector must be a probability vector")
            if np.abs(pi @ a - pi).max() > TOL_STATIONARY:
                raise ValueError("stationary vector is not invariant under the matrix")
            object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in a))
            object.__setattr__(self, "stationary", tuple(float(v) for v in pi))
        elif self.kind != "lebesgue":
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @property
    def name(self) -> str:
        if self.kind == "bernoulli":
            return "bernoulli:" + ",".join(repr(v) for v in self.p)
        if self.kind == "markov":
            return "markov:" + ";".join(",".join(repr(v) for v in r) for r in self.matrix)
        return "lebesgue"


def bernoulli(*p: float) -> MeasureSpec:
    return MeasureSpec("bernoulli", p=tuple(p))


def markov(matrix, stationary=None) -> MeasureSpec:
    return MeasureSpec("markov", matrix=tuple(map(tuple, matrix)),
                       stationary=tuple(stationary) if stationary is not None else ())


LEBESGUE = MeasureSpec("lebesgue")


def stationary_vector(matrix) -> np.ndarray:
    """Left Perron vector of a stochastic matrix, normalised to sum 1."""
    a = np.asarray(matrix, dtype=float)
    w, v = np.linalg.eig(a.T)
    i = int(np.argmin(np.abs(w - 1.0)))
    pi = np.abs(np.real(v[:, i]))
    return pi / pi.sum()


def parry(matrix) -> MeasureSpec:
    """Measure of maximal entropy of an irreducible SFT."""
    a = np.asarray(matrix, dtype=float)
    w, vr = np.linalg.eig(a)
    i = int(np.argmax(np.real(w)))
    lam = float(np.real(w[i]))
    r = np.abs(np.real(vr[:, i]))
    p = a * r[None, :] / (lam * r[:, None])
    p = p / p.sum(axis=1, keepdims=True)
    return markov(p)


def entropy_of(spec: MeasureSpec, system: DynSystem) -> float:
    """Closed-form ``h_mu`` of a built-in measure."""
    if spec.kind == "bernoulli":
        return -math.fsum(v * math.log(v) for v in spec.p if v > 0)
    if spec.kind == "markov":
        pi, p = spec.stationary, spec.matrix
        return -math.fsum(pi[i] * p[i][j] * math.log(p[i][j])
                          for i in range(len(pi)) for j in range(len(pi)) if p[i][j] > 0)
    return math.log(2.0) if system.kind == "doubling" else 0.0


def check_compatible(spec: MeasureSpec, system: DynSystem) -> None:
    if spec.kind == "lebesgue":
        if system.symbolic:
            raise SpecMismatch("lebesgue measure needs a circle system")
        return
    if not system.symbolic:
        raise SpecMismatch(f"{spec.kind} measure needs a shift system")
    size = len(spec.p) if spec.kind == "bernoulli" else len(spec.matrix)
    if size != system.k:
        raise SpecMismatch(f"measure has {size} symbols, system has {system.k}")
    allowed = system.transition_matrix()
    if spec.kind == "bernoulli":
        support = np.asarray(spec.p) > 0
        if (allowed[np.ix_(support, support)] == 0).any():
            raise SpecMismatch("bernoulli measure charges forbidden transitions")
    elif ((np.asarray(spec.matrix) > 0) & (allowed == 0)).any():
        raise SpecMismatch("markov matrix charges forbidden transitions")


# ---------------------------------------------------------------------------
# empirical measures

@dataclass(frozen=True)
class IIDSampler:
    spec: MeasureSpec
    seed: int

    def __str__(self):
        return f"iid[{self.spec.name};seed={self.seed}]"


@dataclass(frozen=True)
class OrbitAverage:
    x0: Point
    length: int

    def __str__(self):
        return f"orbit[{self.x0};length={self.length}]"


@dataclass(frozen=True)
class Loaded:
    path: str

    def __str__(self):
        return f"file[{self.path}]"


@dataclass(eq=False)
class EmpiricalMeasure:
    """Weighted point sample.

    ``data`` is an ``(M, L)`` uint8 array of words for shift systems or an
    ``(M,)`` float array of coordinates for circle systems.
    """

    system: DynSystem
    data: np.ndarray
    weights: Optional[np.ndarray] = None
    provenance: Union[IIDSampler, OrbitAverage, Loaded, None] = None
    _points: list = field(default=None, repr=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.uint8 if self.system.symbolic else np.float64)
        expected = 2 if self.system.symbolic else 1
        if self.data.ndim != expected or self.data.shape[0] < 1:
            raise ValueError("sample array has the wrong shape for this system")
        if self.system.symbolic and self.data.size and int(self.data.max()) >= self.system.k:
            raise ValueError("sample contains symbols outside the alphabet")
        m = self.data.shape[0]
        if self.weights is None:
            self.weights = np.full(m, 1.0 / m)
        else:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape != (m,) or (self.weights < 0).any():
                raise ValueError("weights must be nonnegative, one per point")
            if abs(math.fsum(self.weights) - 1.0) > TOL_SUM:
                raise ValueError("weights must sum to 1")
        self.data.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return self.data.shape[0]

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def points(self) -> list:
        if self._points is None:
            self._points = [point_at(self.system, self.data, i) for i in range(self.size)]
        return self._points

    def point(self, i: int) -> Point:
        return point_at(self.system, self.data, i)

    def mass(self, mask: np.ndarray) -> float:
        return math.fsum(self.weights[np.asarray(mask, dtype=bool)])

    def subset(self, idx: Sequence[int]) -> "EmpiricalMeasure":
        """Renormalised restriction to the given indices."""
        idx = np.asarray(idx)
        w = self.weights[idx]
        return EmpiricalMeasure(self.system, self.data[idx], w / math.fsum(w), self.provenance)


def sample_measure(spec: MeasureSpec, system: DynSystem, M: int, seed: int) -> EmpiricalMeasure:
    """``M`` independent draws, reproducible from ``seed``.

    Symbolic draws have the system's word length.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    check_compatible(spec, system)
    rng = np.random.default_rng(seed)
    if spec.kind == "lebesgue":
        data = rng.random(M)
    elif spec.kind == "bernoulli":
        data = rng.choice(len(spec.p), size=(M, system.length), p=np.asarray(spec.p)).astype(np.uint8)
    else:
        data = _markov_paths(rng, spec, M, system.length)
    return EmpiricalMeasure(system, data, None, IIDSampler(spec, seed))


def _markov_paths(rng, spec: MeasureSpec, M: int, L: int) -> np.ndarray:
    cum = np.cumsum(np.asarray(spec.matrix), axis=1)
    cum[:, -1] = 1.0
    start = np.cumsum(np.asarray(spec.stationary))
    start[-1] = 1.0
    u = rng.random((M, L))
    out = np.empty((M, L), dtype=np.uint8)
    cur = np.searchsorted(start, u[:, 0], side="right")
    out[:, 0] = cur
    for t in range(1, L):
        cur = (u[:, t, None] >= cum[cur]).sum(axis=1)
        out[:, t] = cur
    return out


def point_mass(system: DynSystem, x: Point) -> EmpiricalMeasure:
    return EmpiricalMeasure(system, as_array(system, [x]), None, OrbitAverage(x, 1))


def orbit_average(system: DynSystem, x0: Point, length: int) -> EmpiricalMeasure:
    """Uniform weights on ``x0, T x0, ..., T^{length-1} x0``.

    Shifted words are truncated to a common length so they stack.
    """
    _check_kind(system, x0)
    if length < 1:
        raise ValueError("length must be >= 1")
    if system.symbolic:
        width = len(x0.word) - (length - 1)
        if width < 1:
            raise HorizonExhausted(f"word of length {len(x0.word)} has no {length}-step orbit")
        data = np.array([x0.word[i:i + width] for i in range(length)], dtype=np.uint8)
    else:
        from .systems import circle_orbits

        data = circle_orbits(system, np.array([x0.x]), length)[0]
    return EmpiricalMeasure(system, data, None, OrbitAverage(x0, length))


# ---------------------------------------------------------------------------
# balls

def ball_mask(mu: EmpiricalMeasure, system: DynSystem, center: Point, radius: float, n: int,
              kind: MetricKind) -> np.ndarray:
    return within_mask(system, center, mu.data, n, kind, radius)


def ball_mass(mu: EmpiricalMeasure, system: DynSystem, center: Point, radius: float, n: int,
              kind: MetricKind) -> float:
    """Sample mass of the open ball ``{y : d(center, y) < radius}``."""
    return mu.mass(ball_mask(mu, system, center, radius, n, kind))


def brin_katok_estimate(mu: EmpiricalMeasure, system: DynSystem, x: Point, n: int, delta: float,
                        kind: MetricKind) -> float:
    """``-log mu(B(x, delta)) / n``; an empty empirical ball raises."""
    mass = ball_mass(mu, system, x, delta, n, kind)
    if mass <= 0.0:
        raise EmptyBall(f"no sample point within {delta!r} of the center at n={n}; increase M")
    return -math.log(mass) / n + 0.0


@dataclass(frozen=True)
class LocalEntropyProfile:
    values: tuple
    masses: tuple
    centers: tuple
    median: float
    iqr: float


def draw_centers(mu: EmpiricalMeasure, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.choice(mu.size, size=count, replace=True, p=mu.weights / mu.weights.sum())


def brin_katok_profile(mu: EmpiricalMeasure, system: DynSystem, n: int, delta: float, kind: MetricKind,
                       centers: int = 25, seed: int = 0, center_idx=None) -> LocalEntropyProfile:
    """Brin-Katok estimates at centers drawn from ``mu``, summarised by
    median and interquartile range."""
    idx = draw_centers(mu, centers, seed) if center_idx is None else np.asarray(center_idx)
    values, masses = [], []
    for i in idx:
        mass = ball_mass(mu, system, mu.point(int(i)), delta, n, kind)
        masses.append(mass)
        values.append(-math.log(mass) / n + 0.0)
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    return LocalEntropyProfile(tuple(values), tuple(masses), tuple(int(i) for i in idx),
                               float(med), float(q3 - q1))


# ---------------------------------------------------------------------------
# persistence

def dumps(mu: EmpiricalMeasure) -> str:
    buf = io.StringIO()
    buf.write(f"# system={mu.system.name}\n")
    buf.write(f"# provenance={mu.provenance}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["weight", "point"])
    for i in range(mu.size):
        w.writerow([repr(float(mu.weights[i])), str(mu.point(i))])
    return buf.getvalue()


def save(mu: EmpiricalMeasure, path: str) -> None:
    from .io import atomic_write

    atomic_write(path, dumps(mu))


def loads(text: str, system: DynSystem, source: str = "<string>") -> EmpiricalMeasure:
    rows = [r for r in csv.reader(line for line in text.splitlines() if not line.startswith("#"))]
    if not rows or rows[0] != ["weight", "point"]:
        raise ValueError("sample file must start with a 'weight,point' header")
    weights, points = [], []
    for r in rows[1:]:
        if not r:
            continue
        weights.append(float(r[0]))
        points.append(Symbolic.parse(r[1]) if system.symbolic else Circle(float(r[1])))
    return EmpiricalMeasure(system, as_array(system, points), np.array(weights), Loaded(source))


def load(path: str, system: DynSystem) -> EmpiricalMeasure:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), system, path)
