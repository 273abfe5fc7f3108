"""Property suites run by ``orbit-pressure verify``.

Each suite draws its own random instances from a seeded generator and
returns a `SuiteResult` with the number of checks, the number of failures
and the worst violation seen.
"""
from __future__ import annotations

import math
import random
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import oracles, orbit_metrics
from .estimators import EXACT, GREEDY, _solve, ball_structure
from .orbit_metrics import (
    FAMILIES,
    MatchParams,
    MetricKind,
    bowen_distance,
    distance_grid,
    edit_distance,
    fk_distance,
    match_value,
    maxmean_distance,
    mean_distance,
    orbit_distance,
)
from .systems import (
    Circle,
    Symbolic,
    birkhoff_many,
    doubling,
    full_shift,
    golden_mean,
    rotation,
)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    checks: int
    failures: int
    worst: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" {self.detail}" if self.detail else ""
        return (f"{status} {self.name}: {self.checks - self.failures}/{self.checks} ok, "
                f"worst violation {self.worst:.3g}{extra}")


def systems_under_test(length: int = 160):
    return [full_shift(2, length), golden_mean(length), doubling(), rotation()]


def random_point(rng: random.Random, system):
    if not system.symbolic:
        return Circle(rng.random())
    word = [rng.randrange(system.k)]
    a = system.transition_matrix()
    while len(word) < system.length:
        options = [s for s in range(system.k) if a[word[-1], s]]
        word.append(rng.choice(options))
    return Symbolic(tuple(word))


def random_pair_near(rng: random.Random, system):
    """Pairs that share a random prefix (symbolic) or sit close together
    (circle) so that small distances are exercised, not only the diameter."""
    x = random_point(rng, system)
    if system.symbolic:
        y = random_point(rng, system)
        cut = rng.randrange(0, 12)
        w = list(x.word[:cut]) + list(y.word[cut:])
        if not system.is_allowed(w):
            w = list(x.word)
        return x, Symbolic(tuple(w))
    return x, Circle(x.x + rng.choice([rng.random(), 1e-3 * rng.random(), 1e-6 * rng.random()]))


# ---------------------------------------------------------------------------
# suites

def suite_fk_oracle(pairs: int = 200, n_max: int = 8, seed: int = 0) -> SuiteResult:
    """DP match size against exhaustive enumeration of order-preserving
    bijections, plus witness validity."""
    rng = random.Random(seed)
    sysm = full_shift(2, 64)
    fails, worst = 0, 0.0
    for _ in range(pairs):
        n = rng.randint(1, n_max)
        q = rng.choice([1, 2])
        x, y = random_pair_near(rng, sysm)
        g = oracles.grid(sysm, x, y, n, q)
        vals = sorted({v for row in g for v in row if v > 0}) or [1.0]
        delta = rng.choice(vals + [rng.random()])
        f, wit = match_value(sysm, x, y, MatchParams(n, q, delta))
        truth = oracles.brute_match_size([[v < delta for v in row] for row in g])
        ok = wit.size == truth and f == (n - truth) / n
        ok = ok and all(g[i][j] < delta for i, j in wit.pairs)
        ok = ok and all(a[0] < b[0] and a[1] < b[1] for a, b in zip(wit.pairs, wit.pairs[1:]))
        if not ok:
            fails += 1
            worst = max(worst, abs(wit.size - truth) / n)
    return SuiteResult("fk-oracle", pairs, fails, worst,
                       f"exact-match count {pairs - fails}/{pairs}")


def suite_fk_infimum(pairs: int = 200, n_max: int = 16, seed: int = 1) -> SuiteResult:
    """Min-max FK formula against the definition-level infimum."""
    rng = random.Random(seed)
    systems = systems_under_test(80)
    fails, worst = 0, 0.0
    for t in range(pairs):
        sysm = systems[t % len(systems)]
        n = rng.randint(1, n_max)
        q = rng.choice([1, 2])
        x, y = random_pair_near(rng, sysm)
        a = fk_distance(sysm, x, y, n, q)
        b = oracles.definition_fk(sysm, x, y, n, q)
        if a != b:
            fails += 1
            worst = max(worst, abs(a - b))
    return SuiteResult("fk-infimum", pairs, fails, worst, f"exact-match count {pairs - fails}/{pairs}")


def suite_chain(pairs: int = 1000, n_max: int = 32, seed: int = 2, qs=(1, 2, 4)) -> SuiteResult:
    """mean <= maxmean <= bowen exactly; fk <= bowen + 1e-12."""
    rng = random.Random(seed)
    checks = fails = 0
    worst = 0.0
    for sysm in systems_under_test():
        for q in qs:
            for _ in range(pairs):
                n = rng.randint(1, n_max)
                x, y = random_pair_near(rng, sysm)
                b = bowen_distance(sysm, x, y, n, q)
                mm = maxmean_distance(sysm, x, y, n, q)
                me = mean_distance(sysm, x, y, n, q)
                fk = fk_distance(sysm, x, y, n, q)
                v = max(me - mm, mm - b, fk - b - 1e-12, 0.0)
                checks += 1
                if v > 0:
                    fails += 1
                    worst = max(worst, v)
    return SuiteResult("chain", checks, fails, worst)


def suite_axioms(triples: int = 1000, n_max: int = 16, seed: int = 3) -> SuiteResult:
    """Nonnegativity, d(x,x)=0, exact symmetry, triangle within 1e-9."""
    rng = random.Random(seed)
    checks = fails = 0
    worst = 0.0
    for sysm in systems_under_test():
        for t in range(triples):
            n = rng.randint(1, n_max)
            q = rng.choice([1, 2, 4])
            x, y = random_pair_near(rng, sysm)
            z = random_pair_near(rng, sysm)[1] if t % 2 else random_point(rng, sysm)
            for fam in FAMILIES:
                kind = MetricKind(fam, q)
                dxy = orbit_distance(sysm, x, y, n, kind)
                dyx = orbit_distance(sysm, y, x, n, kind)
                dxz = orbit_distance(sysm, x, z, n, kind)
                dzy = orbit_distance(sysm, z, y, n, kind)
                dxx = orbit_distance(sysm, x, x, n, kind)
                v = max(dxy - (dxz + dzy) - 1e-9, abs(dxy - dyx) if dxy != dyx else 0.0,
                        -min(dxy, dxz, dzy), abs(dxx), 0.0)
                checks += 1
                if v > 0 or dxy != dyx:
                    fails += 1
                    worst = max(worst, v)
    return SuiteResult("axioms", checks, fails, worst)


def suite_edit(pairs: int = 300, n_max: int = 10, seed: int = 4) -> SuiteResult:
    """Edit distance against brute force, and bounded by Hamming / n."""
    rng = random.Random(seed)
    fails, worst = 0, 0.0
    for _ in range(pairs):
        n = rng.randint(1, n_max)
        k = rng.choice([2, 3])
        a = [rng.randrange(k) for _ in range(n)]
        b = [rng.randrange(k) for _ in range(n)]
        e = edit_distance(a, b, n)
        ham = sum(u != v for u, v in zip(a, b)) / n
        v = max(abs(e - oracles.brute_edit_distance(a, b, n)), e - ham, 0.0)
        if v > 0:
            fails += 1
            worst = max(worst, v)
    return SuiteResult("edit", pairs, fails, worst)


def suite_monotone_delta(pairs: int = 200, n_max: int = 12, seed: int = 5) -> SuiteResult:
    """Match sizes are non-decreasing in delta."""
    rng = random.Random(seed)
    sysm = full_shift(2, 64)
    fails = 0
    for _ in range(pairs):
        n = rng.randint(1, n_max)
        x, y = random_pair_near(rng, sysm)
        g = distance_grid(sysm, x, y, n)
        deltas = sorted(set(g.ravel().tolist()) | {1.5})
        sizes = [match_value(sysm, x, y, MatchParams(n, 1, d))[1].size for d in deltas if d > 0]
        if any(a > b for a, b in zip(sizes, sizes[1:])):
            fails += 1
    return SuiteResult("monotone-delta", pairs, fails, 0.0)


def suite_cover(instances: int = 50, seed: int = 6) -> SuiteResult:
    """Exact <= greedy <= (1 + ln 20) exact on tiny instances."""
    rng = np.random.default_rng(seed)
    sysm = full_shift(2, 40)
    fails, worst = 0, 0.0
    bound = 1.0 + math.log(20)
    from .systems import first_symbol

    for _ in range(instances):
        m = int(rng.integers(2, 21))
        data = rng.integers(0, 2, size=(m, 40)).astype(np.uint8)
        data[:, :3] = 0  # shared prefix keeps balls overlapping
        fam = FAMILIES[int(rng.integers(0, 4))]
        n = int(rng.integers(1, 7))
        eps = float(rng.choice([0.05, 0.1, 0.2, 0.3]))
        phi = first_symbol(0.0, float(rng.uniform(-1, 1)))
        kind = MetricKind(fam)
        logw = birkhoff_many(sysm, phi, data, n)
        masses = np.full(m, 1.0 / m)
        ex = _solve(sysm, data, n, kind, eps, logw, masses, 1.0 - eps, EXACT)
        gr = _solve(sysm, data, n, kind, eps, logw, masses, 1.0 - eps, GREEDY)
        v = max(ex.total_weight - gr.total_weight, gr.total_weight - bound * ex.total_weight, 0.0)
        if v > 1e-12 * ex.total_weight:
            fails += 1
            worst = max(worst, v / ex.total_weight)
    return SuiteResult("cover-sandwich", instances, fails, worst)


SUITES = {
    "fk-oracle": suite_fk_oracle,
    "fk-infimum": suite_fk_infimum,
    "chain": suite_chain,
    "axioms": suite_axioms,
    "edit": suite_edit,
    "monotone-delta": suite_monotone_delta,
    "cover-sandwich": suite_cover,
}


@contextmanager
def injected_fault():
    """Flip the strict inequality in match construction."""
    old = orbit_metrics._MATCH_STRICT
    orbit_metrics._MATCH_STRICT = False
    try:
        yield
    finally:
        orbit_metrics._MATCH_STRICT = old


def run(names=("all",), n_max: int = None, pairs: int = None, seed: int = 0, fault: bool = False):
    if "all" in names:
        names = tuple(SUITES)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise KeyError(", ".join(unknown))
    results = []
    for i, name in enumerate(names):
        fn = SUITES[name]
        kwargs = {"seed": seed + i}
        if pairs is not None:
            key = "triples" if name == "axioms" else "instances" if name == "cover-sandwich" else "pairs"
            kwargs[key] = pairs
        if n_max is not None and name in ("fk-oracle",):
            kwargs["n_max"] = n_max
        if fault:
            with injected_fault():
                results.append(fn(**kwargs))
        else:
            results.append(fn(**kwargs))
    return results
