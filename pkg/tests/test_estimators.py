import math

import numpy as np
import pytest

from orbitpressure import oracles
from orbitpressure.errors import ExactTooLarge, GridTooCoarse, NotPrimitive, ProblemTooLarge
from orbitpressure.estimators import (
    EXACT,
    GREEDY,
    TableSpec,
    _solve,
    builtin_grid,
    check_cover,
    convergence_table,
    covering_weight,
    drift_corrected,
    exact_shift_pressure,
    inf_over_q,
    measure_pressure_estimate,
    spanning_pressure,
    topological_cover_weight,
    topological_estimate,
)
from orbitpressure.measures import LEBESGUE, EmpiricalMeasure, bernoulli, point_mass, sample_measure
from orbitpressure.orbit_metrics import FAMILIES, MetricKind
from orbitpressure.systems import (
    ZERO,
    Symbolic,
    birkhoff_many,
    birkhoff_sum,
    constant,
    doubling,
    first_symbol,
    full_shift,
    golden_mean,
    rotation,
    sft,
)

LOG2 = math.log(2)
FS = full_shift(2)
BOWEN = MetricKind("bowen")


def _oracle_sets(system, data, n, family, eps):
    """Ball memberships from the definition-level distance evaluators."""
    pts = [Symbolic(tuple(int(s) for s in row)) for row in data]
    dist = {
        "bowen": oracles.naive_bowen,
        "mean": oracles.naive_mean,
        "maxmean": oracles.naive_maxmean,
        "fk": oracles.definition_fk,
    }[family]
    return [{j for j, y in enumerate(pts) if dist(system, x, y, n) < eps} for x in pts]


def _tiny_instance(rng, m=None):
    m = m or int(rng.integers(2, 13))
    data = rng.integers(0, 2, size=(m, 24)).astype(np.uint8)
    data[:, :2] = 0
    return data


# -- single atoms and degenerate spaces ------------------------------------------------

def test_atom_cover_has_weight_one():
    x = Symbolic((0, 1) * 30)
    sol = covering_weight(FS, ZERO, point_mass(FS, x), 8, 1, 0.1, BOWEN)
    assert sol.size == 1 and sol.total_weight == 1.0 and sol.covered_mass == 1.0


def test_atom_cover_weight_is_birkhoff_exponential():
    x = Symbolic((1, 0, 1) * 20)
    phi = first_symbol(-0.2, 0.7)
    for fam in FAMILIES:
        sol = covering_weight(FS, phi, point_mass(FS, x), 9, 2, 0.1, MetricKind(fam))
        assert sol.total_weight == pytest.approx(math.exp(birkhoff_sum(FS, phi, x, 9, 2)), rel=1e-15)


def test_single_word_space():
    one = sft([[1]], length=64)
    phi = first_symbol(0.3)
    sol = topological_cover_weight(one, phi, 5, 1, 2 ** -4, BOWEN)
    assert sol.size == 1
    assert sol.total_weight == pytest.approx(math.exp(1.5))
    assert exact_shift_pressure(1, [[1]], [0.3]) == pytest.approx(0.3)


# -- solvers against the brute-force oracle ------------------------------------------------

@pytest.mark.parametrize("family", FAMILIES)
def test_exact_matches_brute_force(family):
    rng = np.random.default_rng(FAMILIES.index(family))
    for _ in range(6):
        data = _tiny_instance(rng, m=int(rng.integers(2, 9)))
        n, eps = int(rng.integers(1, 5)), float(rng.choice([0.1, 0.2, 0.3]))
        phi = first_symbol(0.0, float(rng.uniform(-1, 1)))
        logw = birkhoff_many(FS, phi, data, n)
        masses = np.full(len(data), 1.0 / len(data))
        sol = _solve(FS, data, n, MetricKind(family), eps, logw, masses, 1 - eps, EXACT)
        sets = _oracle_sets(FS, data, n, family, eps)
        best = oracles.brute_min_cover(sets, np.exp(logw), masses, 1 - eps)
        assert sol.total_weight == pytest.approx(best, rel=1e-12)


def test_greedy_within_log_factor_of_exact():
    rng = np.random.default_rng(12)
    bound = 1 + math.log(12)
    for _ in range(30):
        data = _tiny_instance(rng, m=12)
        fam = FAMILIES[int(rng.integers(0, 4))]
        n, eps = int(rng.integers(1, 6)), float(rng.choice([0.05, 0.1, 0.2]))
        logw = birkhoff_many(FS, first_symbol(0, float(rng.normal())), data, n)
        masses = np.full(12, 1 / 12)
        ex = _solve(FS, data, n, MetricKind(fam), eps, logw, masses, 1 - eps, EXACT)
        gr = _solve(FS, data, n, MetricKind(fam), eps, logw, masses, 1 - eps, GREEDY)
        assert ex.total_weight <= gr.total_weight * (1 + 1e-12)
        assert gr.total_weight <= bound * ex.total_weight


def test_exact_too_large():
    data = np.zeros((21, 16), dtype=np.uint8)
    mu = EmpiricalMeasure(full_shift(2, 16), data)
    with pytest.raises(ExactTooLarge):
        covering_weight(full_shift(2, 16), ZERO, mu, 4, 1, 0.1, BOWEN, method=EXACT)


def test_greedy_is_deterministic_and_verified():
    mu = sample_measure(bernoulli(0.5, 0.5), FS, 800, seed=9)
    phi = first_symbol(0.0, 0.4)
    for fam in FAMILIES:
        kind = MetricKind(fam)
        a = covering_weight(FS, phi, mu, 6, 1, 0.1, kind)
        b = covering_weight(FS, phi, mu, 6, 1, 0.1, kind)
        assert a.indices == b.indices
        check_cover(a, FS, phi, mu.data, 6, 1, 0.1, kind, np.asarray(mu.weights), 0.9)


def test_zero_potential_weight_is_cardinality():
    mu = sample_measure(bernoulli(0.5, 0.5), FS, 500, seed=1)
    for fam in FAMILIES:
        sol = covering_weight(FS, ZERO, mu, 5, 1, 0.1, MetricKind(fam))
        assert sol.total_weight == sol.size


def test_metric_and_eps_monotonicity_under_exact():
    rng = np.random.default_rng(3)
    for _ in range(15):
        data = _tiny_instance(rng, m=10)
        mu = EmpiricalMeasure(full_shift(2, 24), data)
        sysm = full_shift(2, 24)
        phi = first_symbol(0.0, float(rng.uniform(-1, 1)))
        n = int(rng.integers(2, 6))
        w = {f: covering_weight(sysm, phi, mu, n, 1, 0.2, MetricKind(f), EXACT).total_weight for f in FAMILIES}
        assert w["bowen"] >= w["maxmean"] >= w["mean"]
        assert w["bowen"] >= w["fk"]
        by_eps = [covering_weight(sysm, phi, mu, n, 1, e, BOWEN, EXACT).total_weight for e in (0.05, 0.1, 0.2, 0.3)]
        assert by_eps == sorted(by_eps, reverse=True)


def test_potential_shift_covariance():
    rng = np.random.default_rng(8)
    sysm = full_shift(2, 24)
    for _ in range(10):
        mu = EmpiricalMeasure(sysm, _tiny_instance(rng, m=10))
        t0, t1 = rng.uniform(-1, 1, 2)
        c = float(rng.uniform(-2, 2))
        fam = FAMILIES[int(rng.integers(0, 4))]
        base = measure_pressure_estimate(sysm, first_symbol(t0, t1), mu, 5, 1, 0.1, MetricKind(fam), EXACT)
        moved = measure_pressure_estimate(sysm, first_symbol(t0 + c, t1 + c), mu, 5, 1, 0.1, MetricKind(fam), EXACT)
        assert abs(moved.value - base.value - c) < 1e-9


# -- closed-form oracle ----------------------------------------------------------------------

def test_exact_shift_pressure_examples():
    assert exact_shift_pressure(2) == pytest.approx(0.693147, abs=1e-6)
    assert exact_shift_pressure(2) == pytest.approx(math.log(oracles.count_allowed_words(np.ones((2, 2)), 12)) / 12)
    v = exact_shift_pressure(2, table=[0.0, 0.7])
    assert v == pytest.approx(1.10319, abs=1e-5)
    assert v == pytest.approx(math.log(oracles.weighted_word_sum(np.ones((2, 2)), [0.0, 0.7], 8)) / 8)
    g = [[1, 1], [1, 0]]
    assert exact_shift_pressure(2, g) == pytest.approx(oracles.golden_ratio_entropy(), abs=1e-9)
    ratio = oracles.count_allowed_words(g, 18) / oracles.count_allowed_words(g, 17)
    assert exact_shift_pressure(2, g) == pytest.approx(math.log(ratio), abs=1e-6)


def test_exact_shift_pressure_weighted_sft():
    g, table = [[1, 1], [1, 0]], [0.2, -0.5]
    ratio = oracles.weighted_word_sum(g, table, 16) / oracles.weighted_word_sum(g, table, 15)
    assert exact_shift_pressure(2, g, table) == pytest.approx(math.log(ratio), abs=1e-5)


def test_not_primitive():
    with pytest.raises(NotPrimitive):
        exact_shift_pressure(2, [[0, 1], [1, 0]])


# -- topological covers ------------------------------------------------------------------

def test_spanning_counts_cylinders():
    est = spanning_pressure(FS, ZERO, 8, 2 ** -4)
    assert est.value == pytest.approx(math.log(oracles.count_allowed_words(np.ones((2, 2)), 12)) / 8, rel=1e-12)
    est = spanning_pressure(FS, ZERO, 16, 2 ** -4)
    assert est.value == pytest.approx(20 / 16 * LOG2, rel=1e-12)
    assert est.value == pytest.approx(0.8664, abs=1e-4)


def test_spanning_first_symbol_potential():
    phi = first_symbol(0.0, 0.7)
    oracle = math.log(1 + math.exp(0.7))
    a = spanning_pressure(FS, phi, 15, 2 ** -4).value
    b = spanning_pressure(FS, phi, 16, 2 ** -4).value
    assert abs(drift_corrected(15, a, 16, b) - oracle) < 0.05


def test_spanning_golden_mean_cylinders():
    g = golden_mean()
    est = spanning_pressure(g, ZERO, 10, 2 ** -4)
    assert est.value == pytest.approx(math.log(oracles.count_allowed_words([[1, 1], [1, 0]], 14)) / 10, rel=1e-12)


def test_rotation_spanning_is_small():
    assert spanning_pressure(rotation(), ZERO, 32, 0.1).value <= 0.05


def test_fk_cover_no_heavier_than_bowen():
    for n in (4, 6):
        grid = builtin_grid(FS, n, 1, 2 ** -3)
        fk = topological_cover_weight(FS, ZERO, n, 1, 2 ** -3, MetricKind("fk"), grid)
        bw = topological_cover_weight(FS, ZERO, n, 1, 2 ** -3, BOWEN, grid)
        assert fk.total_weight <= bw.total_weight
        assert fk.covered_mass == 1.0


def test_bowen_topological_n12():
    est = topological_estimate(FS, ZERO, 12, 1, 2 ** -4, BOWEN)
    assert abs(est.value - 16 / 12 * LOG2) <= 0.1


def test_grid_errors():
    with pytest.raises(GridTooCoarse):
        builtin_grid(FS, 4, 1, 2 ** -4, depth=2)
    with pytest.raises(GridTooCoarse):
        builtin_grid(doubling(), 4, 1, 0.1, size=10)
    with pytest.raises(ProblemTooLarge):
        builtin_grid(FS, 30, 1, 2 ** -4)
    with pytest.raises(ProblemTooLarge):
        builtin_grid(doubling(), 30, 1, 0.1)
    assert len(builtin_grid(rotation(), 32, 1, 0.1)) == 10


# -- infimum over q and tables ---------------------------------------------------------------

def test_inf_over_q_single_q():
    mu = sample_measure(bernoulli(0.5, 0.5), FS, 400, seed=2)
    est = inf_over_q(FS, ZERO, mu, 6, 0.1, "mean", Q_max=1)
    direct = measure_pressure_estimate(FS, ZERO, mu, 6, 1, 0.1, MetricKind("mean"))
    assert est.per_q == ((1, direct.value),) and est.value == direct.value


def test_inf_over_q_reports_every_q():
    mu = sample_measure(LEBESGUE, doubling(), 300, seed=2)
    est = inf_over_q(doubling(), ZERO, mu, 4, 0.1, "bowen", Q_max=3)
    assert [q for q, _ in est.per_q] == [1, 2, 3]
    assert est.value == min(v for _, v in est.per_q)


def test_table_single_cell():
    spec = TableSpec("spanning", FS, ZERO, (10,), (2 ** -4,))
    res = convergence_table(spec)
    assert len(res.cells) == 1 and len(res.summaries) == 1
    assert res.summaries[0].stabilized == res.cells[0].estimate.value


def test_table_full_shift_matches_oracle():
    spec = TableSpec("spanning", FS, first_symbol(0.0, 0.7), (12, 14, 16), (2 ** -4,))
    res = convergence_table(spec)
    assert res.oracle == pytest.approx(math.log(1 + math.exp(0.7)))
    assert [c.n for c in res.cells] == [12, 14, 16]
    assert res.summaries[0].gap <= 0.1


def test_table_entropy_gap():
    res = convergence_table(TableSpec("topological", FS, ZERO, (10, 14), (2 ** -4,)))
    assert res.extrapolation[0].gap <= 0.1


def test_table_marks_failed_cells():
    res = convergence_table(TableSpec("topological", FS, ZERO, (6, 30), (2 ** -4,)))
    assert res.cells[0].ok and not res.cells[1].ok
    assert res.cells[1].error == "PROBLEM_TOO_LARGE"


def test_doubling_entropy_table_monotone_in_eps():
    spec = TableSpec("measure", doubling(), ZERO, (8, 12, 16), (0.1, 0.05), measure=LEBESGUE, M=3000, seed=5)
    res = convergence_table(spec)
    by_eps = {s.eps: s.stabilized for s in res.summaries}
    assert by_eps[0.05] >= by_eps[0.1]
