import math

import numpy as np
import pytest
import scipy.integrate as integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import brute_correlation, brute_fourier_b
from lacunary.correlations import (
    TestFunction,
    correlation_direct,
    correlation_naive,
    fourier_b,
    mean_via_b0,
    periodize,
    stability_delta,
    wrap_unit,
)
from lacunary.errors import BudgetError, NoFourierTransformError, TruncationError
from lacunary.fracparts import OrderedPoints
from lacunary.sequences import SequenceSpec, generate

GEO2 = SequenceSpec("geometric", base=2)


# ---------------------------------------------------------------------------
# test functions


def test_box_support_and_integral():
    f = TestFunction("box", 2, 1.5)
    assert f.integral == 9.0  # (2 rho)**2
    assert f(np.array([1.5, -1.5])) == 1.0
    assert f(np.array([1.6, 0.0])) == 0.0


def test_triangle_support_and_integral():
    f = TestFunction("triangle", 1, 2.0)
    assert f.integral == 2.0
    assert f(np.array([0.0])) == 1.0
    assert f(np.array([1.0])) == 0.5
    assert f(np.array([2.0])) == 0.0
    assert f(np.array([-2.5])) == 0.0


def test_bump_support_and_values():
    f = TestFunction("bump", 1, 1.0)
    assert f(np.array([0.0])) == 1.0
    assert f(np.array([1.0])) == 0.0
    assert f(np.array([0.999999])) < 1e-5
    # Euclidean support in dimension 2
    g = TestFunction("bump", 2, 1.0)
    assert g(np.array([0.8, 0.8])) == 0.0  # |y| > 1 though inside the sup-norm box
    assert g(np.array([0.5, 0.5])) > 0.0


def test_bump_integral_quadrature_oracle():
    f = TestFunction("bump", 1, 1.0)
    ref, _ = integrate.quad(lambda y: math.exp(1 - 1 / (1 - y * y)), -1, 1)
    assert f.integral == pytest.approx(ref, rel=1e-9)
    g = TestFunction("bump", 2, 1.5)
    ref2, _ = integrate.dblquad(
        lambda y, x: g(np.array([x, y])), -1.5, 1.5, -1.5, 1.5, epsabs=1e-10
    )
    assert g.integral == pytest.approx(ref2, rel=1e-6)


def test_nonnegative_everywhere():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-3, 3, size=(500, 2))
    for kind in ("box", "triangle", "bump"):
        f = TestFunction(kind, 2, 1.3)
        assert np.all(f(pts) >= 0)


def test_fourier_closed_forms_against_quadrature():
    # fhat(xi) = integral f(y) cos(2 pi xi y) dy for even f
    for kind in ("box", "triangle"):
        f = TestFunction(kind, 1, 1.25)
        for xi in (0.0, 0.3, 1.0, 2.7):
            ref, _ = integrate.quad(
                lambda y: f(np.array([y])) * math.cos(2 * math.pi * xi * y),
                -1.25, 1.25, limit=200,
            )
            assert f.fourier(xi) == pytest.approx(ref, abs=1e-9), (kind, xi)


def test_fourier_at_zero_is_integral():
    for kind in ("box", "triangle"):
        for dim in (1, 2):
            f = TestFunction(kind, dim, 0.75)
            z = np.zeros(dim)
            assert f.fourier(z) == pytest.approx(f.integral, rel=1e-12)


def test_bump_has_no_transform():
    with pytest.raises(NoFourierTransformError):
        TestFunction("bump", 1, 1.0).fourier(0.0)


def test_wrap_unit():
    assert wrap_unit(0.5) == 0.5
    assert wrap_unit(-0.5) == 0.5
    assert wrap_unit(0.7) == pytest.approx(-0.3)
    assert wrap_unit(1.5) == 0.5
    assert np.allclose(wrap_unit(np.array([0.3, -0.25])), [0.3, -0.25])


@given(st.floats(-1e6, 1e6, allow_nan=False))
@settings(max_examples=200, deadline=None)
def test_wrap_unit_properties(y):
    w = float(wrap_unit(y))
    assert -0.5 < w <= 0.5
    shift = y - w
    assert abs(shift - round(shift)) < 1e-9  # differs from y by an integer


# ---------------------------------------------------------------------------
# periodization


def test_periodize_examples():
    f = TestFunction("box", 1, 1.0)
    assert periodize(f, 100, np.array([0.0])) == 1.0
    assert periodize(f, 100, np.array([0.015])) == 0.0
    assert periodize(f, 100, np.array([0.995])) == 1.0  # wraps to -0.005


def test_periodize_n_too_small():
    f = TestFunction("box", 1, 1.0)
    with pytest.raises(ValueError):
        periodize(f, 2, np.array([0.0]))


# ---------------------------------------------------------------------------
# correlation sums


def test_naive_hand_example():
    pts = OrderedPoints.from_theta(np.array([0.0, 0.4, 0.8]))
    f = TestFunction("box", 1, 1.0)
    res = correlation_naive(pts, 2, f)
    assert res.value == pytest.approx(2 / 3, abs=1e-12)
    assert res.tuple_count == 2


def test_grid_support_miss(grid_points):
    pts = grid_points(16)
    assert correlation_direct(pts, 2, TestFunction("box", 1, 0.5)).value == 0.0


def test_grid_two_partners(grid_points):
    pts = grid_points(16)
    res = correlation_direct(pts, 2, TestFunction("box", 1, 1.5))
    assert res.value == pytest.approx(2.0, abs=1e-12)
    assert res.tuple_count == 32


def test_coincident_points():
    # N must exceed 2 rho, so use rho = 0.75 for the two-point multiset
    pts = OrderedPoints.from_theta(np.array([0.3, 0.3]))
    f = TestFunction("box", 1, 0.75)
    assert correlation_direct(pts, 2, f).value == pytest.approx(1.0)
    assert correlation_naive(pts, 2, f).value == pytest.approx(1.0)


def test_direct_equals_naive_sweep(pipeline_points):
    for seed in range(10):
        for n in (16, 32):
            pts = pipeline_points(seed, n)
            for k in (2, 3):
                for kind in ("bump", "box", "triangle"):
                    f = TestFunction(kind, k - 1, 1.0)
                    d = correlation_direct(pts, k, f)
                    v = correlation_naive(pts, k, f)
                    assert abs(d.value - v.value) < 1e-9, (seed, n, k, kind)
                    assert d.tuple_count == v.tuple_count


def test_direct_equals_naive_k4(pipeline_points):
    pts = pipeline_points(3, 24)
    f = TestFunction("bump", 3, 1.0)
    d = correlation_direct(pts, 4, f)
    v = correlation_naive(pts, 4, f)
    assert abs(d.value - v.value) < 1e-9


def test_direct_matches_literal_loop(pipeline_points):
    # a third, fully independent path: literal python loops
    pts = pipeline_points(5, 12)
    f = TestFunction("triangle", 1, 1.0)
    ref = brute_correlation(pts, 2, lambda c: f(np.array(c)))
    assert correlation_direct(pts, 2, f).value == pytest.approx(ref, abs=1e-9)
    g = TestFunction("box", 2, 1.0)
    ref3 = brute_correlation(pts, 3, lambda c: g(np.array(c)))
    assert correlation_direct(pts, 3, g).value == pytest.approx(ref3, abs=1e-9)


def test_linearity(pipeline_points):
    pts = pipeline_points(11, 32)
    f1 = TestFunction("box", 1, 1.0)
    f2 = TestFunction("triangle", 1, 1.0)
    c1, c2 = 0.7, -0.3
    combo = brute_correlation(
        pts, 2, lambda c: c1 * f1(np.array(c)) + c2 * f2(np.array(c))
    )
    split = (
        c1 * correlation_direct(pts, 2, f1).value
        + c2 * correlation_direct(pts, 2, f2).value
    )
    assert combo == pytest.approx(split, abs=1e-9)


def test_nonnegativity(pipeline_points):
    for seed in (0, 1, 2, 3):
        pts = pipeline_points(seed, 64)
        for kind in ("bump", "box", "triangle"):
            assert correlation_direct(pts, 2, TestFunction(kind, 1, 1.0)).value >= 0


def test_reversal_symmetry(pipeline_points):
    # reversing every tuple negates each coordinate; even f is invariant
    pts = pipeline_points(17, 24)
    f = TestFunction("bump", 2, 1.0)
    fwd = correlation_direct(pts, 3, f).value
    rev = brute_correlation(pts, 3, lambda c: f(-np.array(c)))
    assert fwd == pytest.approx(rev, abs=1e-9)


def test_naive_budget_guards(pipeline_points):
    pts = pipeline_points(0, 129)
    with pytest.raises(BudgetError):
        correlation_naive(pts, 2, TestFunction("box", 1, 1.0))
    pts49 = pipeline_points(0, 49)
    with pytest.raises(BudgetError):
        correlation_naive(pts49, 4, TestFunction("box", 3, 1.0))


def test_input_validation(pipeline_points):
    pts = pipeline_points(0, 16)
    with pytest.raises(ValueError):
        correlation_direct(pts, 5, TestFunction("box", 4, 1.0))
    with pytest.raises(ValueError):
        correlation_direct(pts, 2, TestFunction("box", 2, 1.0))  # dim mismatch
    small = OrderedPoints.from_theta(np.array([0.1, 0.4, 0.9]))
    with pytest.raises(ValueError):
        correlation_direct(small, 2, TestFunction("box", 1, 2.0))  # N <= 2 rho


# ---------------------------------------------------------------------------
# Fourier route


def test_fourier_b_pair_example():
    # explicit [1,2], l=1, box rho=1: the two solutions hit fhat(+-1/2) = 0
    f = TestFunction("box", 1, 1.0)
    res = fourier_b(1, 2, 2, f, [1, 2])
    assert abs(res.value) < 1e-12
    assert res.tail_bound == 0.0


def test_fourier_b0_geometric():
    f = TestFunction("triangle", 1, 1.0)
    values = generate(GEO2, 16)
    res = fourier_b(0, 16, 2, f, values)
    assert res.value == pytest.approx(f.integral * 16 * 15, rel=1e-12)
    assert res.tail_bound == 0.0
    assert mean_via_b0(2, f, 16, values) == pytest.approx(
        f.integral * (1 - 1 / 16), rel=1e-12
    )


def test_mean_via_b0_explicit():
    f = TestFunction("triangle", 1, 1.0)
    assert mean_via_b0(2, f, 3, [1, 2, 3]) == pytest.approx(
        f.integral * 2 / 3, rel=1e-12
    )


def test_mean_scales_linearly():
    # scaling rho scales the triangle integral; the mean follows suit
    values = generate(GEO2, 8)
    m1 = mean_via_b0(2, TestFunction("triangle", 1, 1.0), 8, values)
    m2 = mean_via_b0(2, TestFunction("triangle", 1, 2.0), 8, values)
    assert m2 == pytest.approx(2.0 * m1, rel=1e-12)


def test_fourier_b_k2_against_brute():
    f = TestFunction("triangle", 1, 1.0)
    values = [1, 2, 3, 5, 9, 12]  # explicit, irregular
    for l in (0, 1, 2, 4, 7):
        mine = fourier_b(l, 6, 2, f, values, n_max=40)
        ref = brute_fourier_b(l, 6, 2, f, values, n_max=40)
        assert mine.value == pytest.approx(ref, abs=1e-12), l


def test_fourier_b_k3_against_brute():
    f = TestFunction("triangle", 2, 1.0)
    values = generate(GEO2, 5)
    for l in (0, 2, 6):
        mine = fourier_b(l, 5, 3, f, values, n_max=12)
        ref = brute_fourier_b(l, 5, 3, f, values, n_max=12)
        assert mine.value == pytest.approx(ref, abs=1e-12), l


def test_fourier_truncation_error():
    f = TestFunction("triangle", 1, 1.0)
    # n_max below |l| leaves a nonzero tail bound
    res = fourier_b(100, 4, 2, f, generate(GEO2, 4), n_max=10)
    assert res.tail_bound > 0
    with pytest.raises(TruncationError):
        fourier_b(100, 4, 2, f, generate(GEO2, 4), n_max=10, tol=1e-30)


def test_fourier_requires_closed_form():
    with pytest.raises(NoFourierTransformError):
        fourier_b(0, 8, 2, TestFunction("bump", 1, 1.0), generate(GEO2, 8))


def test_fourier_mean_and_variance_identities():
    """Tiny-N cross-check of the alpha-expansion: quadrature over alpha of
    R_2 reproduces b(0,N)/N**2, and its variance matches sum b(l)**2/N**4."""
    n = 8
    values = generate(GEO2, n)
    f = TestFunction("triangle", 1, 1.0)
    grid = 20001
    rs = np.empty(grid)
    varr = np.array(values, dtype=float)
    for i in range(grid):
        alpha = (i + 0.5) / grid
        theta = (alpha * varr) % 1.0
        pts = OrderedPoints.from_theta(theta)
        rs[i] = correlation_direct(pts, 2, f).value
    mean_quad = rs.mean()
    mean_fourier = mean_via_b0(2, f, n, values)
    assert mean_quad == pytest.approx(mean_fourier, abs=2e-3)
    var_quad = rs.var()
    # full spectrum, oracle-side: accumulate b(l) over every (n, pair)
    # with |n| <= 64 (triangle fhat(8)**2 < 1e-7 beyond)
    b = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            delta = values[i] - values[j]
            for nn in range(-64, 65):
                if nn:
                    b[nn * delta] = b.get(nn * delta, 0.0) + f.fourier(nn / n)
    var_fourier = sum(v * v for v in b.values()) / n**4
    assert var_quad == pytest.approx(var_fourier, rel=2e-2)


# ---------------------------------------------------------------------------
# stability and a-priori growth


def test_stability_k_zero(pipeline_points):
    pts = pipeline_points(1, 100)
    f = TestFunction("bump", 1, 1.0)
    assert stability_delta(pts, pts, 2, f) == 0.0


def test_stability_grid_both_vanish():
    f = TestFunction("box", 1, 0.5)
    a = OrderedPoints.from_theta(np.arange(32) / 32)
    b = OrderedPoints.from_theta(np.arange(40) / 40)
    assert stability_delta(a, b, 2, f, delta=0.1) == 0.0


def test_stability_regime_check(pipeline_points):
    f = TestFunction("bump", 1, 1.0)
    pts = pipeline_points(1, 100)
    big = pipeline_points(1, 200)
    with pytest.raises(ValueError):
        stability_delta(pts, big, 2, f, delta=0.3)  # K=100 > 100**0.7


def test_stability_requires_same_alpha(pipeline_points):
    f = TestFunction("bump", 1, 1.0)
    with pytest.raises(ValueError):
        stability_delta(pipeline_points(1, 100), pipeline_points(2, 110), 2, f)


def test_apriori_growth_bound(pipeline_points):
    # max R_2 over 100 alphas grows slower than N**0.2
    f = TestFunction("bump", 1, 1.0)
    maxima = []
    for n in (256, 1024, 4096):
        worst = max(
            correlation_direct(pipeline_points(seed, n), 2, f).value
            for seed in range(100)
        )
        maxima.append((n, worst))
    logs = np.log(np.array([m for _, m in maxima]))
    ns = np.log(np.array([n for n, _ in maxima]))
    slope = np.polyfit(ns, logs, 1)[0]
    assert slope < 0.2
