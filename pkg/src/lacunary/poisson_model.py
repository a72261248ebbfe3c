"""Reference laws of the Poisson model (i.i.d. uniform levels).

For uncorrelated levels the level-a spacing density is

    P_a(s) = s**(a-1) * exp(-s) / (a-1)!

the joint law of r consecutive nearest-neighbour spacings is the product
of standard exponentials, and the number of points in a random arc of
length lambda/N is Poisson(lambda).  Every empirical statistic in the
package is compared against these evaluators.
"""

from __future__ import annotations

import math
from typing import Sequence

MAX_LEVEL = 20  # factorials precomputed exactly; larger levels are rejected

_FACT = [math.factorial(k) for k in range(MAX_LEVEL + 1)]

_GAMMA_TOL = 1e-16  # relative term cutoff; leaves absolute error well under 1e-10
_GAMMA_MAX_ITER = 600


def _check_level(a: int):
    if not isinstance(a, int) or a < 1:
        raise ValueError("level must be a positive integer")
    if a > MAX_LEVEL:
        raise ValueError(f"level must be <= {MAX_LEVEL}")


def level_spacing_pdf(a: int, s: float) -> float:
    """Density of the level-a spacing, s**(a-1) e**-s / (a-1)!."""
    _check_level(a)
    if s < 0:
        raise ValueError("spacing must be nonnegative")
    if a == 1:
        return math.exp(-s)
    return s ** (a - 1) * math.exp(-s) / _FACT[a - 1]


def level_spacing_cdf(a: int, s: float) -> float:
    """Distribution function of the level-a spacing (regularized lower gamma)."""
    _check_level(a)
    if s < 0:
        raise ValueError("spacing must be nonnegative")
    return regularized_lower_gamma(float(a), s)


def interval_count_pmf(lam: float, k: int) -> float:
    """Probability of exactly k points in an arc of scaled length lambda."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if not isinstance(k, int) or k < 0:
        raise ValueError("occupancy must be a nonnegative integer")
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))


def joint_spacing_pdf(s: Sequence[float]) -> float:
    """Joint density of r consecutive spacings: prod exp(-s_i)."""
    total = 0.0
    for si in s:
        if si < 0:
            raise ValueError("spacings must be nonnegative")
        total += si
    return math.exp(-total)


def regularized_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x).

    Series expansion for x < a + 1, Lentz continued fraction for the
    complement otherwise (the standard stable split).
    """
    if x < 0 or a <= 0:
        raise ValueError("need x >= 0 and a > 0")
    if x == 0.0:
        return 0.0
    log_prefactor = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # P(a,x) = x**a e**-x / Gamma(a) * sum_n x**n / (a (a+1) ... (a+n))
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(_GAMMA_MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _GAMMA_TOL:
                return total * math.exp(log_prefactor)
        raise ArithmeticError("incomplete gamma series failed to converge")
    # continued fraction for Q(a,x), modified Lentz
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            return 1.0 - math.exp(log_prefactor) * h
    raise ArithmeticError("incomplete gamma continued fraction failed to converge")
