import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacunary.fracparts import OrderedPoints
from lacunary.poisson_model import interval_count_pmf
from lacunary.spacings import (
    interval_counts,
    joint_spacings,
    ks_distance,
    normalized_spacings,
    spacing_histogram,
)

TOL = 2.0**-40

FOUR = OrderedPoints.from_theta(np.array([0.0, 0.1, 0.5, 0.6]))


def test_grid_unit_spacings(grid_points):
    deltas = normalized_spacings(grid_points(16), 1, "circular").deltas
    assert np.allclose(deltas, 1.0, atol=0)


def test_four_point_example_circular():
    deltas = normalized_spacings(FOUR, 1, "circular").deltas
    assert np.allclose(deltas, [0.4, 1.6, 0.4, 1.6], atol=1e-12)


def test_four_point_example_level2_linear():
    deltas = normalized_spacings(FOUR, 2, "linear").deltas
    assert np.allclose(deltas, [2.0, 2.0], atol=1e-12)


def test_counts_per_mode():
    rng = np.random.default_rng(1)
    pts = OrderedPoints.from_theta(rng.random(50))
    for a in (1, 3, 7):
        assert len(normalized_spacings(pts, a, "circular").deltas) == 50
        assert len(normalized_spacings(pts, a, "linear").deltas) == 50 - a


def test_circular_sum_telescopes():
    rng = np.random.default_rng(2)
    for n in (10, 500, 4096):
        pts = OrderedPoints.from_theta(rng.random(n))
        total = math.fsum(normalized_spacings(pts, 1, "circular").deltas)
        assert abs(total - n) < TOL


@given(st.lists(st.floats(0.0, 0.999999, allow_nan=False), min_size=2, max_size=200))
@settings(max_examples=100, deadline=None)
def test_circular_sum_property(theta):
    pts = OrderedPoints.from_theta(np.array(theta))
    total = math.fsum(normalized_spacings(pts, 1, "circular").deltas)
    assert abs(total - len(theta)) < TOL
    assert np.all(normalized_spacings(pts, 1, "circular").deltas >= 0)


@given(st.lists(st.floats(0.0, 100.0, allow_nan=False), min_size=1, max_size=100))
@settings(max_examples=100, deadline=None)
def test_ks_distance_in_unit_interval(samples):
    d = ks_distance(samples, lambda s: 1 - math.exp(-s))
    assert 0.0 <= d <= 1.0


def test_level_a_is_sum_of_level_1():
    rng = np.random.default_rng(3)
    pts = OrderedPoints.from_theta(rng.random(200))
    base = normalized_spacings(pts, 1, "circular").deltas
    for a in (2, 3, 5):
        lev = normalized_spacings(pts, a, "circular").deltas
        ext = np.concatenate([base, base[: a - 1]])
        sums = np.convolve(ext, np.ones(a), mode="valid")[:200]
        assert np.max(np.abs(lev - sums)) < TOL


def test_level_out_of_range():
    with pytest.raises(ValueError):
        normalized_spacings(FOUR, 4, "circular")
    with pytest.raises(ValueError):
        normalized_spacings(FOUR, 0, "circular")
    with pytest.raises(ValueError):
        normalized_spacings(FOUR, 1, "diagonal")


def test_joint_equals_level1():
    rng = np.random.default_rng(4)
    pts = OrderedPoints.from_theta(rng.random(64))
    tup = joint_spacings(pts, 1, "circular")
    assert tup.shape == (64, 1)
    assert np.array_equal(tup[:, 0], normalized_spacings(pts, 1, "circular").deltas)


def test_joint_grid(grid_points):
    tup = joint_spacings(grid_points(8), 2, "circular")
    assert tup.shape == (8, 2)
    assert np.allclose(tup, 1.0, atol=0)


def test_joint_four_point_example():
    tup = joint_spacings(FOUR, 2, "circular")
    expect = [[0.4, 1.6], [1.6, 0.4], [0.4, 1.6], [1.6, 0.4]]
    assert np.allclose(tup, expect, atol=1e-12)
    lin = joint_spacings(FOUR, 2, "linear")
    assert lin.shape == (2, 2)


def test_interval_counts_grid(grid_points):
    hist = interval_counts(grid_points(16), 1.0, 5000, seed=3)
    assert hist.frequencies() == {1: 1.0}


def test_interval_counts_vanishing_arc(grid_points):
    hist = interval_counts(grid_points(16), 1e-9, 2000, seed=3)
    assert hist.frequencies() == {0: 1.0}


def test_interval_counts_poisson_iid():
    # direct simulation oracle: iid uniform points behave Poisson;
    # deviation scale has an M-trial term and a point-set term
    n, m = 10**4, 10**5
    rng = np.random.default_rng(12345)
    pts = OrderedPoints.from_theta(np.sort(rng.random(n)))
    hist = interval_counts(pts, 1.0, m, seed=6)
    for k in range(5):
        pmf = interval_count_pmf(1.0, k)
        sigma = math.sqrt(pmf * (1 - pmf) * (1 / m + 1 / n))
        assert abs(hist.frequency(k) - pmf) < 3 * sigma, k


def test_interval_counts_mean():
    n, m = 10**4, 10**5
    rng = np.random.default_rng(99)
    pts = OrderedPoints.from_theta(np.sort(rng.random(n)))
    lam = 1.0
    hist = interval_counts(pts, lam, m, seed=1)
    sigma = math.sqrt(lam / m + lam / n)
    assert abs(hist.mean() - lam) < 3 * sigma


def test_interval_counts_reproducible(grid_points):
    pts = grid_points(32)
    a = interval_counts(pts, 2.5, 1000, seed=11)
    b = interval_counts(pts, 2.5, 1000, seed=11)
    assert a.counts == b.counts
    assert interval_counts(pts, 2.5, 1000, seed=12).counts != a.counts


def test_interval_counts_validation(grid_points):
    pts = grid_points(8)
    with pytest.raises(ValueError):
        interval_counts(pts, 0.0, 10, seed=1)
    with pytest.raises(ValueError):
        interval_counts(pts, 9.0, 10, seed=1)
    with pytest.raises(ValueError):
        interval_counts(pts, 1.0, 0, seed=1)


def test_ks_one_point():
    cdf = lambda s: 1 - math.exp(-s)
    c = 0.7
    assert ks_distance([c], cdf) == pytest.approx(max(cdf(c), 1 - cdf(c)))


def test_ks_quantile_construction():
    n = 200
    qs = [-math.log(1 - (i - 0.5) / n) for i in range(1, n + 1)]
    assert ks_distance(qs, lambda s: 1 - math.exp(-s)) == pytest.approx(1 / (2 * n))


def test_ks_exponential_draws():
    rng = np.random.default_rng(7)
    draws = rng.exponential(size=10**4)
    assert ks_distance(draws, lambda s: 1 - math.exp(-s)) < 0.02


def test_ks_empty():
    with pytest.raises(ValueError):
        ks_distance([], lambda s: s)


def test_spacing_histogram_shape():
    rng = np.random.default_rng(8)
    pts = OrderedPoints.from_theta(rng.random(500))
    sample = normalized_spacings(pts, 1, "circular")
    edges, counts, dens = spacing_histogram(sample, 0.1, 10.0)
    assert len(edges) == 101 and len(counts) == 101 and len(dens) == 100
    assert counts.sum() == 500
    # density integrates to the in-range mass
    mass = (counts[:-1].sum()) / 500
    assert np.sum(dens) * 0.1 == pytest.approx(mass)
