"""Clustering of fractional parts in 1/N windows.

G(N, alpha, beta) counts the x <= N with ||alpha a(x) - beta|| < 1/N
(strict); G(N, alpha) is its maximum over beta, found exactly by a
sliding window over the sorted circle.  The exceptional set
A(delta, N) = {alpha : G(N, alpha) > N**delta} is probed by Monte Carlo
over seeded alphas, and the measure of

    Lambda(a, N) = {alpha in [0,1] : ||alpha a_j|| <= 1/N for all j}

is computed as an exact rational via interval-union intersection.  The
4**k / N**k bound is far too small for Monte Carlo to certify, which is
why no floating point enters that path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetError, PrecisionMarginError
from .fracparts import (
    DEFAULT_GUARD,
    OrderedPoints,
    frac_parts,
    required_precision,
    sample_alpha,
)
from .seeds import derive_seed
from .sequences import SequenceSpec, generate

#: strict comparisons against 1/N thresholds are rejected inside this margin
BOUNDARY_MARGIN = 2.0**-40


def circle_distance(u: float, v: float) -> float:
    d = abs(u - v) % 1.0
    return min(d, 1.0 - d)


def _exact_cut(theta: np.ndarray, target: Fraction, side: str) -> int:
    """searchsorted against an exact rational target.

    Stored values are doubles, hence exact rationals; the float pass can
    misplace entries within an ulp of the cut, so those candidates are
    re-decided with Fraction comparisons.
    """
    cut = float(target)
    i = int(np.searchsorted(theta, cut, side=side))
    eps = 8.0 * np.spacing(max(abs(cut), 1.0))
    if side == "left":
        while i > 0 and cut - theta[i - 1] <= eps and Fraction(float(theta[i - 1])) >= target:
            i -= 1
        while i < len(theta) and theta[i] - cut <= eps and Fraction(float(theta[i])) < target:
            i += 1
    else:
        while i > 0 and cut - theta[i - 1] <= eps and Fraction(float(theta[i - 1])) > target:
            i -= 1
        while i < len(theta) and theta[i] - cut <= eps and Fraction(float(theta[i])) <= target:
            i += 1
    return i


def g_count(points: OrderedPoints, beta) -> int:
    """#{x <= N : circle distance of theta_x to beta < 1/N}, strict.

    The threshold is the exact rational 1/N and the points are taken at
    their stored double values, so the strict comparison is decided
    exactly even when a point sits on the boundary.  beta may be a float
    or an exact Fraction (maximizing windows can be narrower than one
    float ulp, in which case only a rational beta attains the maximum).
    """
    n = points.n
    theta = points.theta_sorted
    if n == 1:
        return 1
    w = Fraction(1, n)
    b = (Fraction(beta) if isinstance(beta, Fraction) else Fraction(float(beta))) % 1
    lo, hi = b - w, b + w
    count = _exact_cut(theta, hi, "left") - _exact_cut(theta, lo, "right")
    if lo < 0:
        count += n - _exact_cut(theta, lo + 1, "right")
    if hi > 1:
        count += _exact_cut(theta, hi - 1, "left")
    if points.eps_theta > 0.0:
        _check_margin_near(points, float(b), 1.0 / n)
    return min(count, n)


def _check_margin_near(points: OrderedPoints, beta: float, w: float):
    """Reject the run if any point sits within BOUNDARY_MARGIN of the cut."""
    theta = points.theta_sorted
    n = points.n
    for cut in ((beta - w) % 1.0, (beta + w) % 1.0):
        j = int(np.searchsorted(theta, cut))
        for idx in (j - 1, j % n):
            d = circle_distance(float(theta[idx]), beta)
            if abs(d - w) < BOUNDARY_MARGIN:
                raise PrecisionMarginError(
                    f"distance {d!r} within 2**-40 of threshold {w!r}; "
                    "rerun at higher precision"
                )


@dataclass(frozen=True)
class WindowCensus:
    n: int
    alpha_digest: str
    g_max: int
    argmax_beta: float  # float view of the exact witness below
    argmax_beta_exact: Fraction  # g_count at this beta equals g_max, always


def _aug_value(theta: np.ndarray, i: int, n: int) -> Fraction:
    if i < n:
        return Fraction(float(theta[i]))
    return Fraction(float(theta[i - n])) + 1


def g_max(points: OrderedPoints) -> WindowCensus:
    """Exact maximum over beta of g_count, with a witnessing beta.

    The maximum ranges over real beta.  The supremum over open arcs of
    length 2/N equals the maximum over half-open arcs
    [theta_j, theta_j + 2/N) anchored at the points: any open-arc
    cluster can be slid left until its first point touches the arc
    start.  Arc membership is decided against the exact rational 2/N
    (float candidates within an ulp of the cut are re-decided with
    rational arithmetic).  The witness is the exact midpoint of a
    maximizing cluster, which keeps every member at strict distance
    below 1/N; it is reported both as a Fraction (always attains the
    maximum) and as a float (may fall on a boundary in the degenerate
    case of a maximizing window narrower than one ulp).
    """
    n = points.n
    theta = points.theta_sorted
    if n == 1:
        t = Fraction(float(theta[0]))
        return WindowCensus(1, points.alpha_digest, 1, float(t), t)
    width = Fraction(2, n)
    aug = np.concatenate([theta, theta + 1.0])
    if width >= 1:  # N = 2: the open arc is the whole circle
        best, best_j = n, 0
    else:
        width_f = float(width)
        approx = np.searchsorted(aug, theta + width_f, side="left")
        eps = 8.0 * np.spacing(1.0)
        best, best_j = 0, 0
        for j in range(n):
            target = Fraction(float(theta[j])) + width
            cut = theta[j] + width_f
            h = int(approx[j])
            while h - 1 > j and cut - aug[h - 1] <= eps and _aug_value(theta, h - 1, n) >= target:
                h -= 1
            while h < j + n and aug[h] - cut <= eps and _aug_value(theta, h, n) < target:
                h += 1
            cnt = min(h - j, n)
            if points.eps_theta > 0.0:
                for probe in (h - 1, h):
                    if j < probe < j + n:
                        span = float(aug[probe] - theta[j])
                        if abs(span - width_f) < BOUNDARY_MARGIN:
                            raise PrecisionMarginError(
                                "cluster span within 2**-40 of 2/N; "
                                "rerun at higher precision"
                            )
            if cnt > best:
                best, best_j = cnt, j
    lo = Fraction(float(theta[best_j]))
    hi = _aug_value(theta, best_j + best - 1, n)
    witness = ((lo + hi) / 2) % 1
    return WindowCensus(n, points.alpha_digest, best, float(witness), witness)


@dataclass(frozen=True)
class ExceptionalFraction:
    fraction: float
    ci_halfwidth: float  # binomial 95% confidence half-width
    threshold: float
    exceed_count: int
    samples: int
    g_values: tuple[int, ...]


def exceptional_fraction(
    delta: float,
    n: int,
    samples: int,
    master_seed: int,
    spec: SequenceSpec,
    guard: int = DEFAULT_GUARD,
) -> ExceptionalFraction:
    """Estimated measure of A(delta, N) over `samples` seeded alphas."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if samples < 100:
        raise ValueError("need at least 100 alpha samples")
    threshold = float(n) ** delta
    values = generate(spec, n)
    precision = required_precision(spec, n, guard)
    g_values = []
    exceed = 0
    for i in range(samples):
        alpha = sample_alpha(derive_seed(master_seed, i), precision)
        census = g_max(frac_parts(alpha, values, guard))
        g_values.append(census.g_max)
        if census.g_max > threshold:
            exceed += 1
    frac = exceed / samples
    half = 1.96 * math.sqrt(frac * (1.0 - frac) / samples)
    return ExceptionalFraction(
        fraction=frac,
        ci_halfwidth=half,
        threshold=threshold,
        exceed_count=exceed,
        samples=samples,
        g_values=tuple(g_values),
    )


# ---------------------------------------------------------------------------
# exact measure of Lambda(a, N)


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint closed intervals with exact rational endpoints in [0, 1]."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def __contains__(self, alpha) -> bool:
        a = Fraction(alpha)
        return any(lo <= a <= hi for lo, hi in self.intervals)


def _merge(intervals: list[tuple[Fraction, Fraction]]):
    intervals.sort()
    out: list[tuple[Fraction, Fraction]] = []
    for lo, hi in intervals:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


_LAMBDA_OPS_BUDGET = 1_000_000


def lambda_measure(a: Sequence[int], n: int) -> IntervalUnion:
    """Exact {alpha in [0,1] : ||alpha a_j|| <= 1/N for all j} as intervals.

    Requires increasing positive a with a_{j+1} >= N a_j, k = len(a) <= 3
    and a_1 <= 1000.  The constraints are intersected sequentially; each
    current interval only meets the O(local) arcs of the next constraint,
    so the union stays small.  The resulting measure is exact and always
    obeys the 4**k / N**k bound.
    """
    a = [int(v) for v in a]
    k = len(a)
    if not 1 <= k <= 3:
        raise ValueError("need 1 <= k <= 3 constraints")
    if a[0] < 1 or any(y <= x for x, y in zip(a, a[1:])):
        raise ValueError("a must be strictly increasing positive integers")
    if a[0] > 1000:
        raise BudgetError("first constraint capped at a_1 <= 1000")
    if n < 2:
        raise ValueError("N must be >= 2")
    for x, y in zip(a, a[1:]):
        if y < n * x:
            raise ValueError("need a_{j+1} >= N * a_j")

    current: list[tuple[Fraction, Fraction]] = [(Fraction(0), Fraction(1))]
    ops = 0
    for aj in a:
        w = Fraction(1, n * aj)
        new: list[tuple[Fraction, Fraction]] = []
        for lo, hi in current:
            b_lo = math.ceil(aj * (lo - w))
            b_hi = math.floor(aj * (hi + w))
            ops += b_hi - b_lo + 1
            if ops > _LAMBDA_OPS_BUDGET:
                raise BudgetError("interval intersection exceeds op budget")
            for b in range(b_lo, b_hi + 1):
                center = Fraction(b, aj)
                ilo = max(lo, center - w)
                ihi = min(hi, center + w)
                if ilo <= ihi:
                    new.append((ilo, ihi))
        current = _merge(new)
        if not current:
            break

    union = IntervalUnion(tuple(current))
    bound = Fraction(4**k, n**k)
    # the bound holds for every valid input; a violation means a bug here
    if union.measure > bound:
        raise AssertionError(
            f"computed measure {union.measure} exceeds the {bound} bound"
        )
    return union
