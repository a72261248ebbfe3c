import math

import numpy as np
import pytest

from lacunary.errors import InsufficientPrecisionError
from lacunary.fracparts import (
    FixedPointAlpha,
    OrderedPoints,
    alpha_from_rational,
    ceil_log2,
    frac_parts,
    required_precision,
    required_precision_for_values,
    sample_alpha,
)
from lacunary.sequences import SequenceSpec, generate

TOL = 2.0**-40


def circle_dist(u, v):
    d = abs(u - v) % 1.0
    return min(d, 1.0 - d)


def test_required_precision_examples():
    assert required_precision(SequenceSpec("geometric", base=2), 100, 64) == 171
    assert required_precision(SequenceSpec("polynomial", degree=2), 1000, 64) == 94
    assert required_precision(SequenceSpec("explicit", values=(1,)), 1, 64) == 64


def test_ceil_log2():
    assert [ceil_log2(v) for v in (1, 2, 3, 4, 5, 1024, 10**6)] == [
        0, 1, 2, 2, 3, 10, 20,
    ]


def test_sample_alpha_deterministic():
    a = sample_alpha(1, 128)
    b = sample_alpha(1, 128)
    assert a.mantissa == b.mantissa
    assert a.digest() == b.digest()


def test_sample_alpha_distinct_seeds():
    assert sample_alpha(1, 128).mantissa != sample_alpha(2, 128).mantissa


def test_sample_alpha_prefix_consistent():
    a = sample_alpha(1, 128)
    b = sample_alpha(1, 192)
    assert a.mantissa == b.mantissa >> 64
    # and again across a much larger gap
    c = sample_alpha(1, 4096)
    assert a.mantissa == c.mantissa >> (4096 - 128)


def test_alpha_zero():
    alpha = alpha_from_rational(0, 1, 64)
    pts = frac_parts(alpha, [2, 4, 8])
    assert np.all(pts.theta_by_index == 0.0)


def test_alpha_half_integer_products():
    alpha = alpha_from_rational(1, 2, 64)
    pts = frac_parts(alpha, [2, 4, 8])
    assert np.all(pts.theta_by_index == 0.0)


def test_alpha_third():
    alpha = alpha_from_rational(1, 3, 128)
    pts = frac_parts(alpha, [2, 4, 8, 16])
    expect = [2 / 3, 1 / 3, 2 / 3, 1 / 3]
    for got, want in zip(pts.theta_by_index, expect):
        assert circle_dist(got, want) < TOL


@pytest.mark.parametrize("p,q", [(1, 7), (3, 10), (123456, 999983), (577, 1000)])
def test_rational_oracle(p, q):
    # exact-rational oracle: {p * 2**x mod q} / q
    n = 200
    values = generate(SequenceSpec("geometric", base=2), n)
    precision = required_precision_for_values(values, 48)
    alpha = alpha_from_rational(p, q, precision)
    pts = frac_parts(alpha, values)
    for x, v in enumerate(values):
        exact = (p * v % q) / q
        assert circle_dist(pts.theta_by_index[x], exact) < TOL


def test_sorted_is_permutation():
    pts = frac_parts(sample_alpha(9, 512), generate(SequenceSpec("geometric", base=2), 64))
    assert np.array_equal(np.sort(pts.theta_by_index), pts.theta_sorted)
    assert np.all(np.diff(pts.theta_sorted) >= 0)
    assert np.all((pts.theta_sorted >= 0) & (pts.theta_sorted < 1))


def test_precision_monotonicity():
    values = generate(SequenceSpec("geometric", base=2), 100)
    lo = frac_parts(sample_alpha(5, 200), values)
    hi = frac_parts(sample_alpha(5, 400), values)
    assert np.max(np.abs(lo.theta_by_index - hi.theta_by_index)) < TOL


def test_insufficient_precision():
    values = generate(SequenceSpec("geometric", base=2), 100)
    with pytest.raises(InsufficientPrecisionError):
        frac_parts(sample_alpha(5, 64), values)


def test_eps_theta_bound():
    spec = SequenceSpec("geometric", base=2)
    values = generate(spec, 500)
    pts = frac_parts(sample_alpha(3, required_precision(spec, 500, 48)), values, 48)
    assert 0 < pts.eps_theta <= 2.0**-48


def test_fixed_point_validation():
    with pytest.raises(ValueError):
        FixedPointAlpha(mantissa=-1, precision_bits=64, provenance="x")
    with pytest.raises(ValueError):
        FixedPointAlpha(mantissa=1 << 64, precision_bits=64, provenance="x")
    with pytest.raises(ValueError):
        FixedPointAlpha(mantissa=0, precision_bits=32, provenance="x")
    with pytest.raises(ValueError):
        alpha_from_rational(3, 2, 64)


def test_alpha_value_exact():
    alpha = alpha_from_rational(1, 4, 64)
    assert alpha.value() == math.ldexp(1, -2)


def test_from_theta_validation():
    with pytest.raises(ValueError):
        OrderedPoints.from_theta(np.array([0.2, 1.0]))
    with pytest.raises(ValueError):
        OrderedPoints.from_theta(np.array([]))


def test_digest_distinguishes_precision():
    assert sample_alpha(1, 128).digest() != sample_alpha(1, 192).digest()
