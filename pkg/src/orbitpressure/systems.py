"""State spaces, maps, base metrics and potentials of the built-in systems.

Two families of state space are supported:

* one-sided symbolic words over ``{0, ..., k-1}`` truncated at a finite
  horizon, acted on by the left shift (full shift or a subshift of finite
  type), with the metric ``2**-j`` where ``j`` is the first index at which two
  words differ;
* the circle ``[0, 1)`` with the wrap-around metric, acted on by the doubling
  map or an irrational rotation.

Scalar functions (`apply_map`, `orbit_segment`, `base_distance`,
`birkhoff_sum`) operate on single points. The ``*_many`` helpers are their
vectorised counterparts over point arrays and perform the same floating point
operations, so scalar and batch results agree bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import HorizonExhausted, KindMismatch

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_LENGTH = 256


# ---------------------------------------------------------------------------
# points

@dataclass(frozen=True)
class Symbolic:
    """A finite word; ``word[0]`` is the coordinate at time zero."""

    word: tuple

    def __post_init__(self):
        word = tuple(int(s) for s in self.word)
        if len(word) < 1:
            raise ValueError("symbolic word must have length >= 1")
        if min(word) < 0:
            raise ValueError("symbols must be non-negative")
        object.__setattr__(self, "word", word)

    def __len__(self):
        return len(self.word)

    def __str__(self):
        if max(self.word) < 10:
            return "".join(str(s) for s in self.word)
        return ".".join(str(s) for s in self.word)

    @classmethod
    def parse(cls, text: str) -> "Symbolic":
        text = text.strip()
        if "." in text:
            return cls(tuple(int(t) for t in text.split(".")))
        return cls(tuple(int(c) for c in text))


@dataclass(frozen=True)
class Circle:
    """A point of the circle, reduced modulo 1 on construction."""

    x: float

    def __post_init__(self):
        x = float(self.x) % 1.0
        if x == 1.0:  # -tiny % 1.0 rounds up to 1.0
            x = 0.0
        object.__setattr__(self, "x", x)

    def __str__(self):
        return repr(self.x)


Point = Union[Symbolic, Circle]


# ---------------------------------------------------------------------------
# systems

SYMBOLIC_KINDS = ("fullshift", "sft")
CIRCLE_KINDS = ("doubling", "rotation")


@dataclass(frozen=True)
class DynSystem:
    """A map together with its state space.

    ``length`` is the truncation horizon of symbolic words drawn for this
    system; circle systems ignore it.
    """

    kind: str
    k: int = 2
    transitions: tuple = None
    alpha: float = None
    length: int = DEFAULT_LENGTH

    def __post_init__(self):
        if self.kind not in SYMBOLIC_KINDS + CIRCLE_KINDS:
            raise ValueError(f"unknown system kind {self.kind!r}")
        if self.kind == "sft":
            a = np.asarray(self.transitions, dtype=np.int64)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError("transition matrix must be square")
            if not np.isin(a, (0, 1)).all():
                raise ValueError("transition matrix entries must be 0 or 1")
            if (a.sum(axis=1) == 0).any():
                raise ValueError("transition matrix has a row without successors")
            object.__setattr__(self, "k", int(a.shape[0]))
            object.__setattr__(self, "transitions", tuple(tuple(int(v) for v in row) for row in a))
        if self.kind == "rotation":
            if self.alpha is None or not 0.0 < float(self.alpha) < 1.0:
                raise ValueError("rotation angle must lie in (0, 1)")
            object.__setattr__(self, "alpha", float(self.alpha))
        if self.symbolic and (self.k < 1 or self.length < 1):
            raise ValueError("alphabet size and horizon must be positive")

    @property
    def symbolic(self) -> bool:
        return self.kind in SYMBOLIC_KINDS

    @property
    def name(self) -> str:
        if self.kind == "fullshift":
            return f"fullshift{self.k}"
        if self.kind == "sft":
            rows = ",".join("".join(str(v) for v in row) for row in self.transitions)
            return f"sft[{rows}]"
        if self.kind == "rotation":
            return f"rotation[{self.alpha!r}]"
        return "doubling"

    def transition_matrix(self) -> np.ndarray:
        if self.kind == "sft":
            return np.array(self.transitions, dtype=np.int64)
        if self.kind == "fullshift":
            return np.ones((self.k, self.k), dtype=np.int64)
        raise KindMismatch(f"{self.name} has no transition matrix")

    def is_allowed(self, word: Sequence[int]) -> bool:
        """True when consecutive symbols respect the transition matrix."""
        if any(s >= self.k for s in word):
            return False
        if self.kind != "sft":
            return True
        a = self.transitions
        return all(a[s][t] for s, t in zip(word, word[1:]))


def full_shift(k: int = 2, length: int = DEFAULT_LENGTH) -> DynSystem:
    return DynSystem("fullshift", k=k, length=length)


def sft(matrix, length: int = DEFAULT_LENGTH) -> DynSystem:
    return DynSystem("sft", transitions=tuple(map(tuple, matrix)), length=length)


def golden_mean(length: int = DEFAULT_LENGTH) -> DynSystem:
    """SFT forbidding the block ``11``."""
    return sft(((1, 1), (1, 0)), length=length)


def doubling() -> DynSystem:
    return DynSystem("doubling")


def rotation(alpha: float = GOLDEN) -> DynSystem:
    return DynSystem("rotation", alpha=alpha)


# ---------------------------------------------------------------------------
# potentials

def _identity(x):
    return x


def _cos2pi(x):
    return np.cos(2.0 * np.pi * x)


def _sin2pi(x):
    return np.sin(2.0 * np.pi * x)


@dataclass(frozen=True)
class CircleCallback:
    func: Callable
    sup_norm: float
    lipschitz: float
    integral: float  # against Lebesgue measure


CIRCLE_CALLBACKS = {
    "identity": CircleCallback(_identity, 1.0, 1.0, 0.5),
    "cos2pi": CircleCallback(_cos2pi, 1.0, 2.0 * math.pi, 0.0),
    "sin2pi": CircleCallback(_sin2pi, 1.0, 2.0 * math.pi, 0.0),
}


@dataclass(frozen=True)
class Potential:
    """A continuous observable with a known sup-norm bound.

    Kinds: ``zero``, ``constant`` (``value``), ``first_symbol`` (``table``
    indexed by the symbol at time zero) and ``circle`` (a registered
    ``callback`` plus an additive ``offset``).
    """

    kind: str = "zero"
    value: float = 0.0
    table: tuple = ()
    callback: str = ""
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "first_symbol", "circle"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "first_symbol":
            if not self.table:
                raise ValueError("first_symbol potential needs a table")
            object.__setattr__(self, "table", tuple(float(v) for v in self.table))
        if self.kind == "circle" and self.callback not in CIRCLE_CALLBACKS:
            raise ValueError(f"unknown circle callback {self.callback!r}")

    @property
    def sup_norm(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return abs(self.value)
        if self.kind == "first_symbol":
            return max(abs(v) for v in self.table)
        return CIRCLE_CALLBACKS[self.callback].sup_norm + abs(self.offset)

    @property
    def name(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "constant":
            return f"const:{self.value!r}"
        if self.kind == "first_symbol":
            return "first_symbol:" + ",".join(repr(v) for v in self.table)
        if self.offset:
            return f"circle:{self.callback}+{self.offset!r}"
        return f"circle:{self.callback}"

    def shifted(self, c: float) -> "Potential":
        """The potential ``phi + c``."""
        if self.kind == "zero":
            return Potential("constant", value=float(c))
        if self.kind == "constant":
            return Potential("constant", value=self.value + c)
        if self.kind == "first_symbol":
            return Potential("first_symbol", table=tuple(v + c for v in self.table))
        return Potential("circle", callback=self.callback, offset=self.offset + c)

    def __call__(self, x: Point) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.value
        if self.kind == "first_symbol":
            if not isinstance(x, Symbolic):
                raise KindMismatch("first_symbol potential needs a symbolic point")
            return self.table[x.word[0]]
        if not isinstance(x, Circle):
            raise KindMismatch("circle potential needs a circle point")
        return float(CIRCLE_CALLBACKS[self.callback].func(x.x)) + self.offset

    def evaluate(self, system: DynSystem, values: np.ndarray) -> np.ndarray:
        """Vectorised evaluation: ``values`` holds symbols (symbolic systems)
        or coordinates (circle systems)."""
        values = np.asarray(values)
        if self.kind == "zero":
            return np.zeros(values.shape)
        if self.kind == "constant":
            return np.full(values.shape, self.value)
        if self.kind == "first_symbol":
            if not system.symbolic:
                raise KindMismatch("first_symbol potential needs a symbolic system")
            table = np.asarray(self.table)
            if values.size and values.max() >= len(table):
                raise ValueError("symbol outside the potential table")
            return table[values]
        if system.symbolic:
            raise KindMismatch("circle potential needs a circle system")
        return CIRCLE_CALLBACKS[self.callback].func(values) + self.offset


ZERO = Potential()


def constant(c: float) -> Potential:
    return Potential("constant", value=float(c))


def first_symbol(*table: float) -> Potential:
    return Potential("first_symbol", table=tuple(table))


def circle_potential(callback: str, offset: float = 0.0) -> Potential:
    return Potential("circle", callback=callback, offset=offset)


# ---------------------------------------------------------------------------
# scalar operations

def _check_kind(system: DynSystem, *points: Point) -> None:
    expected = Symbolic if system.symbolic else Circle
    for p in points:
        if not isinstance(p, expected):
            raise KindMismatch(f"{type(p).__name__} point given to {system.name}")


def apply_map(system: DynSystem, x: Point) -> Point:
    _check_kind(system, x)
    if system.symbolic:
        if len(x.word) < 2:
            raise HorizonExhausted("shifting a length-1 word leaves nothing")
        return Symbolic(x.word[1:])
    if system.kind == "doubling":
        return Circle((2.0 * x.x) % 1.0)
    return Circle((x.x + system.alpha) % 1.0)


def orbit_segment(system: DynSystem, x: Point, n: int, q: int = 1) -> list:
    """``[x, T^q x, ..., T^{q(n-1)} x]``."""
    if n < 1 or q < 1:
        raise ValueError("n and q must be >= 1")
    _check_kind(system, x)
    if system.symbolic:
        if (n - 1) * q >= len(x.word):
            raise HorizonExhausted(
                f"word of length {len(x.word)} cannot be shifted {(n - 1) * q} times"
            )
        return [Symbolic(x.word[q * i:]) for i in range(n)]
    out = [x]
    y = x
    for _ in range(n - 1):
        for _ in range(q):
            y = apply_map(system, y)
        out.append(y)
    return out


def symbolic_distance(u: Sequence[int], v: Sequence[int]) -> float:
    """``2**-j`` for the first differing index ``j`` over the shorter length."""
    for j in range(min(len(u), len(v))):
        if u[j] != v[j]:
            return math.ldexp(1.0, -j)
    return 0.0


def circle_distance(a: float, b: float) -> float:
    t = abs(a - b)
    return min(t, 1.0 - t)


def base_distance(system: DynSystem, x: Point, y: Point) -> float:
    _check_kind(system, x, y)
    if system.symbolic:
        return symbolic_distance(x.word, y.word)
    return circle_distance(x.x, y.x)


def birkhoff_sum(system: DynSystem, phi: Potential, x: Point, n: int, q: int = 1) -> float:
    """``phi(x) + phi(T^q x) + ... + phi(T^{q(n-1)} x)`` summed in time order."""
    total = 0.0
    for y in orbit_segment(system, x, n, q):
        total += phi(y)
    return total


def depth_needed(eps: float) -> int:
    """Look-ahead symbols that resolve symbolic distances below ``eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if eps >= 1:
        return 0
    return math.ceil(math.log2(1.0 / eps))


def symbols_to_agree(r: float) -> int:
    """Smallest ``j`` with ``2**-j < r``: two words are closer than ``r``
    exactly when they agree on their first ``j`` symbols (or on the whole
    compared length, if shorter)."""
    if r <= 0:
        raise ValueError("radius must be positive")
    j = 0
    while math.ldexp(1.0, -j) >= r:
        j += 1
    return j


def check_horizon(system: DynSystem, length: int, n: int, q: int, eps: float = None) -> None:
    """Raise `HorizonExhausted` unless words of ``length`` support ``n`` steps
    of size ``q`` (plus the look-ahead for ``eps`` when given)."""
    if not system.symbolic:
        return
    need = (n - 1) * q + 1 if eps is None else n * q + depth_needed(eps)
    if need > length:
        raise HorizonExhausted(
            f"horizon {length} too short for n={n}, q={q}"
            + ("" if eps is None else f", eps={eps!r}") + f" (needs {need})"
        )


# ---------------------------------------------------------------------------
# batch helpers

def as_array(system: DynSystem, points: Sequence[Point]) -> np.ndarray:
    """Stack points into ``(M, L)`` uint8 words or ``(M,)`` float coordinates."""
    points = list(points)
    if not points:
        raise ValueError("empty point list")
    _check_kind(system, *points)
    if system.symbolic:
        lengths = {len(p.word) for p in points}
        if len(lengths) != 1:
            raise ValueError("symbolic points of a batch must share one length")
        if max(max(p.word) for p in points) > 255:
            raise ValueError("alphabets above 256 symbols are not supported")
        return np.array([p.word for p in points], dtype=np.uint8)
    return np.array([p.x for p in points], dtype=np.float64)


def point_at(system: DynSystem, data: np.ndarray, i: int) -> Point:
    if system.symbolic:
        return Symbolic(tuple(int(s) for s in data[i]))
    return Circle(float(data[i]))


def map_many(system: DynSystem, xs: np.ndarray) -> np.ndarray:
    """Circle map applied elementwise, same arithmetic as `apply_map`."""
    if system.kind == "doubling":
        return np.remainder(2.0 * xs, 1.0)
    if system.kind == "rotation":
        return np.remainder(xs + system.alpha, 1.0)
    raise KindMismatch("map_many is for circle systems")


def circle_orbits(system: DynSystem, xs: np.ndarray, n: int, q: int = 1) -> np.ndarray:
    """``(M, n)`` array whose column ``i`` is ``T^{qi}`` of ``xs``."""
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty((xs.shape[0], n))
    cur = xs.copy()
    out[:, 0] = cur
    for i in range(1, n):
        for _ in range(q):
            cur = map_many(system, cur)
        out[:, i] = cur
    return out


def birkhoff_many(system: DynSystem, phi: Potential, data: np.ndarray, n: int, q: int = 1) -> np.ndarray:
    """`birkhoff_sum` for every point of a batch (time-ordered summation)."""
    if system.symbolic:
        check_horizon(system, data.shape[1], n, q)
        total = np.zeros(data.shape[0])
        for i in range(n):
            total = total + phi.evaluate(system, data[:, q * i])
        return total
    orbits = circle_orbits(system, data, n, q)
    total = np.zeros(data.shape[0])
    for i in range(n):
        total = total + phi.evaluate(system, orbits[:, i])
    return total
