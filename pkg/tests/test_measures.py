import math

import numpy as np
import pytest

from orbitpressure import oracles
from orbitpressure.errors import EmptyBall, SpecMismatch
from orbitpressure.measures import (
    LEBESGUE,
    EmpiricalMeasure,
    ball_mask,
    ball_mass,
    bernoulli,
    brin_katok_estimate,
    brin_katok_profile,
    dumps,
    entropy_of,
    load,
    loads,
    markov,
    orbit_average,
    parry,
    point_mass,
    sample_measure,
    save,
)
from orbitpressure.orbit_metrics import FAMILIES, MetricKind
from orbitpressure.systems import Circle, Symbolic, doubling, full_shift, golden_mean, rotation

FS = full_shift(2)
HALF = bernoulli(0.5, 0.5)


def test_sampling_is_reproducible():
    a = sample_measure(HALF, FS, 4, seed=42)
    b = sample_measure(HALF, FS, 4, seed=42)
    assert np.array_equal(a.data, b.data)
    assert a.data.shape == (4, FS.length)
    assert not np.array_equal(a.data, sample_measure(HALF, FS, 4, seed=43).data)


def test_lebesgue_single_point():
    mu = sample_measure(LEBESGUE, rotation(), 1, seed=0)
    assert mu.size == 1 and 0.0 <= mu.data[0] < 1.0


def test_degenerate_markov_is_constant_zero():
    mu = sample_measure(markov([[1.0, 0.0], [1.0, 0.0]]), FS, 50, seed=3)
    assert not mu.data.any()


def test_markov_respects_transitions():
    g = golden_mean(64)
    mu = sample_measure(parry(g.transition_matrix()), g, 200, seed=1)
    assert all(g.is_allowed(row.tolist()) for row in mu.data)
    # symbol frequencies match the stationary vector
    pi = mu.provenance.spec.stationary
    assert abs(mu.data.mean() - pi[1]) < 0.01


def test_spec_mismatch():
    with pytest.raises(SpecMismatch):
        sample_measure(LEBESGUE, FS, 3, seed=0)
    with pytest.raises(SpecMismatch):
        sample_measure(HALF, doubling(), 3, seed=0)
    with pytest.raises(SpecMismatch):
        sample_measure(bernoulli(0.2, 0.3, 0.5), FS, 3, seed=0)
    with pytest.raises(SpecMismatch):
        sample_measure(HALF, golden_mean(), 3, seed=0)


def test_spec_validation():
    with pytest.raises(ValueError):
        bernoulli(0.5, 0.6)
    with pytest.raises(ValueError):
        markov([[0.5, 0.5], [1.0, 0.0]], stationary=[0.5, 0.5])
    m = markov([[0.5, 0.5], [1.0, 0.0]])
    assert m.stationary == pytest.approx((2 / 3, 1 / 3))


def test_entropy_closed_forms():
    g = golden_mean()
    assert entropy_of(HALF, FS) == pytest.approx(math.log(2))
    assert entropy_of(parry(g.transition_matrix()), g) == pytest.approx(oracles.golden_ratio_entropy())
    assert entropy_of(LEBESGUE, doubling()) == pytest.approx(math.log(2))
    assert entropy_of(LEBESGUE, rotation()) == 0.0


def test_weights_validation():
    with pytest.raises(ValueError):
        EmpiricalMeasure(FS, np.zeros((2, 8)), np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        EmpiricalMeasure(FS, np.full((2, 8), 3))


def test_ball_mass_extremes():
    mu = sample_measure(HALF, FS, 200, seed=0)
    center = mu.point(0)
    for fam in FAMILIES:
        assert ball_mass(mu, FS, center, 3.0, 5, MetricKind(fam)) == 1.0
    outside = Symbolic((1,) * FS.length)
    if not (mu.data == 1).all(axis=1).any():
        assert ball_mass(mu, FS, outside, 2 ** -30, 5, MetricKind("bowen")) == 0.0
    mu_c = sample_measure(LEBESGUE, doubling(), 100, seed=1)
    assert ball_mass(mu_c, doubling(), Circle(0.123456789), 1e-12, 3, MetricKind("mean")) == 0.0


def test_bowen_ball_is_cylinder_of_length_n_plus_j():
    n, j, M = 4, 3, 50_000
    mu = sample_measure(HALF, FS, M, seed=7)
    center = sample_measure(HALF, FS, 1, seed=99).point(0)
    mass = ball_mass(mu, FS, center, 2.0 ** -j, n, MetricKind("bowen"))
    p = oracles.bernoulli_cylinder_mass((0.5, 0.5), center.word[: n + j])
    assert p == 2.0 ** -7
    assert abs(mass - p) <= 3 * math.sqrt(p * (1 - p) / M)


def test_ball_mass_monotone_in_kind():
    mu = sample_measure(HALF, FS, 3000, seed=2)
    rng = np.random.default_rng(0)
    for c in rng.integers(0, 3000, 15):
        center = mu.point(int(c))
        for r in (0.3, 0.125, 0.06):
            m = {f: ball_mask(mu, FS, center, r, 8, MetricKind(f)) for f in FAMILIES}
            assert not (m["bowen"] & ~m["maxmean"]).any()
            assert not (m["maxmean"] & ~m["mean"]).any()
            assert not (m["bowen"] & ~m["fk"]).any()
            masses = {f: mu.mass(v) for f, v in m.items()}
            assert masses["bowen"] <= masses["maxmean"] <= masses["mean"]
            assert masses["bowen"] <= masses["fk"]


def test_brin_katok_point_mass_is_zero():
    x = Symbolic((0, 1) * 40)
    mu = point_mass(FS, x)
    for fam in FAMILIES:
        assert brin_katok_estimate(mu, FS, x, 10, 0.1, MetricKind(fam)) == 0.0


def test_brin_katok_empty_ball():
    mu = sample_measure(HALF, FS, 10, seed=0)
    with pytest.raises(EmptyBall):
        brin_katok_estimate(mu, FS, Symbolic((1, 0) * 128), 30, 2 ** -10, MetricKind("bowen"))


def test_brin_katok_antitone_in_mass():
    masses = [0.5, 0.1, 0.01]
    vals = [-math.log(m) / 8 for m in masses]
    assert vals == sorted(vals)


def test_brin_katok_bernoulli_bowen():
    mu = sample_measure(HALF, FS, 50_000, seed=11)
    center = mu.point(17)
    est = brin_katok_estimate(mu, FS, center, 8, 2 ** -3, MetricKind("bowen"))
    assert abs(est - math.log(2)) <= 0.15 + 3 / 8 * math.log(2)  # cylinder oracle: (n+3)/n log 2
    exact = -math.log(oracles.bernoulli_cylinder_mass((0.5, 0.5), center.word[:11])) / 8
    assert abs(est - exact) < 0.15


def test_brin_katok_rotation_stays_small():
    r = rotation()
    mu = sample_measure(LEBESGUE, r, 10_000, seed=4)
    for fam in FAMILIES:
        assert brin_katok_estimate(mu, r, Circle(0.3), 64, 0.1, MetricKind(fam)) <= 0.05


def test_profile_reports_median_and_iqr():
    mu = sample_measure(HALF, FS, 5000, seed=5)
    prof = brin_katok_profile(mu, FS, 6, 0.125, MetricKind("mean"), centers=25, seed=1)
    assert len(prof.values) == 25
    assert prof.median == pytest.approx(float(np.median(prof.values)))
    assert prof.iqr >= 0


def test_orbit_average():
    x = Symbolic((0, 1, 1) * 10)
    mu = orbit_average(FS, x, 3)
    assert mu.size == 3 and mu.data.shape == (3, 28)
    mc = orbit_average(rotation(0.25), Circle(0.0), 4)
    assert mc.data.tolist() == [0.0, 0.25, 0.5, 0.75]


def test_csv_roundtrip(tmp_path):
    mu = sample_measure(HALF, full_shift(2, 12), 5, seed=3)
    path = tmp_path / "s.csv"
    save(mu, str(path))
    back = load(str(path), full_shift(2, 12))
    assert np.array_equal(back.data, mu.data)
    assert np.array_equal(back.weights, mu.weights)
    mc = sample_measure(LEBESGUE, doubling(), 4, seed=1)
    back = loads(dumps(mc), doubling())
    assert np.array_equal(back.data, mc.data)
