"""Exact solution counting for the Diophantine systems behind the spacing results.

Systems handled (all counts are of ordered solutions, exactly as the
systems are stated; no quotients by symmetry):

* sandwich       |y_1 A_1 + ... + y_s A_s + b| <= C A_1, y in [-N,N]**s
* homogeneous    y_1 a(z_1) + ... + y_r a(z_r) = 0 and y_1 + ... + y_r = 0
                 with y != 0, 1 <= z_j <= N; the ``distinct`` variant
                 requires the z_j pairwise distinct, the ``sys3`` variant
                 allows repeats and classifies each solution as degenerate
                 (every block of equal z-indices has y-sum zero) or not
* pair_equation  m . Delta(n) = m' . Delta(n') with n, n' distinct
                 k-tuples, (m, m') != 0, all variables bounded by N
* contrast       the triple-correlation collision equation with both
                 coefficient vectors nonzero; counted for a(x) = x**2
                 against a lacunary a(x) to expose the N**7 vs
                 (N log N)**5 separation

Plumbing: everything is exact integer arithmetic.  Solution sets along a
line {base + t*step} are counted by interval intersection instead of
enumeration wherever the per-z-tuple structure allows; the value joins
for pair_equation/contrast use exact integer keys (int64 fast path when
magnitudes provably fit, big-int merge otherwise), so collisions in the
join are impossible by construction.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError

_INT64_SAFE = 1 << 62


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _t_interval(base: int, step: int, bound: int) -> tuple[int, int]:
    """Integer t with |base + t*step| <= bound (step != 0); may be empty."""
    lo_num = -bound - base
    hi_num = bound - base
    if step > 0:
        return _ceil_div(lo_num, step), hi_num // step
    return _ceil_div(hi_num, step), lo_num // step


def _extended_gcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


@lru_cache(maxsize=None)
def _box_sum_table(m: int, n_bound: int) -> tuple[int, ...]:
    """counts[s + m*n_bound] = #{y in [-N,N]**m : sum y = s}, exact."""
    table = [1]
    for _ in range(m):
        width = 2 * n_bound + 1
        new = [0] * (len(table) + width - 1)
        for i, c in enumerate(table):
            if c:
                for j in range(width):
                    new[i + j] += c
        table = new
    return tuple(table)


def _box_sum_count(m: int, n_bound: int, s: int) -> int:
    idx = s + m * n_bound
    table = _box_sum_table(m, n_bound)
    if 0 <= idx < len(table):
        return table[idx]
    return 0


@dataclass(frozen=True)
class CountResult:
    total: int
    degenerate: Optional[int]
    nondegenerate: Optional[int]
    n: int
    params: dict
    elapsed: float


def _validate_values(values, n: int) -> list[int]:
    vals = list(values)[:n]
    if len(vals) < n:
        raise ValueError(f"need at least {n} sequence values")
    if vals[0] < 1 or any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("sequence values must be strictly increasing positive")
    return vals


# ---------------------------------------------------------------------------
# sandwich inequality (oracle-grade brute force with a solved last coordinate)


def count_sandwich(coeffs: Sequence[int], b: int, c, n_bound: int) -> int:
    """#{y in [-N,N]**s : |y_1 A_1 + ... + y_s A_s + b| <= C A_1}.

    coeffs must be strictly decreasing positive integers, s <= 4.  The
    bound C may be any positive rational (Fraction, int, or float, taken
    at its exact value).  The last coordinate is solved by interval
    arithmetic, the rest are enumerated.
    """
    a = [int(v) for v in coeffs]
    s = len(a)
    if not 1 <= s <= 4:
        raise ValueError("need 1 <= s <= 4 coefficients")
    if any(v < 1 for v in a) or any(x <= y for x, y in zip(a, a[1:])):
        raise ValueError("coefficients must be strictly decreasing positive integers")
    c = Fraction(c)
    if c <= 0:
        raise ValueError("C must be positive")
    if (2 * n_bound + 1) ** (s - 1) > 2_000_000:
        raise BudgetError("sandwich enumeration exceeds budget (2N+1)**(s-1) <= 2e6")

    bound = c * a[0]
    lo_s = -bound - b
    hi_s = bound - b
    a_last = a[-1]

    def count_last(partial: int) -> int:
        lo = _ceil_div_frac(lo_s - partial, a_last)
        hi = _floor_div_frac(hi_s - partial, a_last)
        lo = max(lo, -n_bound)
        hi = min(hi, n_bound)
        return hi - lo + 1 if hi >= lo else 0

    total = 0
    if s == 1:
        return count_last(0)
    rng = range(-n_bound, n_bound + 1)
    if s == 2:
        for y1 in rng:
            total += count_last(y1 * a[0])
    elif s == 3:
        for y1 in rng:
            p1 = y1 * a[0]
            for y2 in rng:
                total += count_last(p1 + y2 * a[1])
    else:
        for y1 in rng:
            p1 = y1 * a[0]
            for y2 in rng:
                p2 = p1 + y2 * a[1]
                for y3 in rng:
                    total += count_last(p2 + y3 * a[2])
    return total


def _ceil_div_frac(x, d: int) -> int:
    if isinstance(x, Fraction):
        return -((-x.numerator) // (x.denominator * d))
    return _ceil_div(x, d)


def _floor_div_frac(x, d: int) -> int:
    if isinstance(x, Fraction):
        return x.numerator // (x.denominator * d)
    return x // d


def count_hyperplane_pair(
    coeffs: Sequence[int], b: int, d: int, c, n_bound: int
) -> int:
    """#{y in [-N,N]**s : |sum y_i A_i + b| <= C A_1 and sum y_i + d = 0}.

    The two-condition system behind the s-2 bound; solved by direct
    enumeration with the linear condition eliminating the last
    coordinate.  Small N only; the reduced one-condition form is what
    count_sandwich handles at scale.
    """
    a = [int(v) for v in coeffs]
    s = len(a)
    if not 2 <= s <= 4:
        raise ValueError("need 2 <= s <= 4 coefficients")
    if any(v < 1 for v in a) or any(x <= y for x, y in zip(a, a[1:])):
        raise ValueError("coefficients must be strictly decreasing positive integers")
    if (2 * n_bound + 1) ** (s - 1) > 500_000:
        raise BudgetError("hyperplane-pair enumeration capped at (2N+1)**(s-1) <= 5e5")
    c = Fraction(c)
    bound = c * a[0]
    count = 0
    rng = range(-n_bound, n_bound + 1)
    for head in _product_tuples(rng, s - 1):
        last = -d - sum(head)
        if abs(last) > n_bound:
            continue
        total = sum(yi * ai for yi, ai in zip(head, a)) + last * a[-1] + b
        if abs(Fraction(total)) <= bound:
            count += 1
    return count


# ---------------------------------------------------------------------------
# homogeneous system


def _partitions(items: tuple[int, ...]):
    """All set partitions of items (tuple of tuples, order canonical)."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield ((first,),) + part
        for i, block in enumerate(part):
            yield part[:i] + ((first,) + block,) + part[i + 1 :]


@lru_cache(maxsize=8)
def _partitions_of(r: int):
    return tuple(_partitions(tuple(range(r))))


def _group_solutions(values_l: Sequence[int], sizes: Sequence[int], n_bound: int) -> int:
    """#y (including y = 0) grouped by equal z-values.

    values_l are the distinct a(z) values, sizes the group sizes; y
    splits into group sums u_g, each realized by a box-sum count.
    """
    l = len(values_l)
    if l == 1:
        return _box_sum_count(sizes[0], n_bound, 0)
    if l == 2:
        # u1 (A1 - A2) = 0 with A1 != A2 forces u = 0
        return _box_sum_count(sizes[0], n_bound, 0) * _box_sum_count(
            sizes[1], n_bound, 0
        )
    if l == 3:
        a1, a2, a3 = values_l
        m1, m2, m3 = sizes
        b1, b2 = a1 - a3, a2 - a3
        g = math.gcd(b1, b2)
        s1, s2 = b2 // g, -(b1 // g)
        s3 = -(s1 + s2)  # nonzero: b1 != b2 for distinct values
        t_hi = min(
            (m1 * n_bound) // abs(s1),
            (m2 * n_bound) // abs(s2),
            (m3 * n_bound) // abs(s3),
        )
        if m1 == m2 == m3 == 1:
            return 2 * t_hi + 1
        total = 0
        for t in range(-t_hi, t_hi + 1):
            total += (
                _box_sum_count(m1, n_bound, t * s1)
                * _box_sum_count(m2, n_bound, t * s2)
                * _box_sum_count(m3, n_bound, t * s3)
            )
        return total
    # l == 4: all singleton groups
    return _count_quad(values_l, n_bound)


def _count_quad(a: Sequence[int], n_bound: int) -> int:
    """#y in [-N,N]**4 (including 0) with sum y = 0 and sum y*a = 0, a distinct."""
    b1, b2, b3 = a[0] - a[3], a[1] - a[3], a[2] - a[3]
    g, u, v = _extended_gcd(b2, b3)
    step2, step3 = b3 // g, -(b2 // g)
    step_sum = step2 + step3  # nonzero: b2 != b3
    total = 0
    for y1 in range(-n_bound, n_bound + 1):
        r = -y1 * b1
        if r % g:
            continue
        sc = r // g
        p0, q0 = u * sc, v * sc
        lo2, hi2 = _t_interval(p0, step2, n_bound)
        lo3, hi3 = _t_interval(q0, step3, n_bound)
        lo4, hi4 = _t_interval(y1 + p0 + q0, step_sum, n_bound)
        lo, hi = max(lo2, lo3, lo4), min(hi2, hi3, hi4)
        if hi >= lo:
            total += hi - lo + 1
    return total


def count_homogeneous(
    r: int, n_bound: int, values, variant: str = "distinct"
) -> CountResult:
    """Exact count of (y, z) solving the homogeneous two-equation system.

    variant="distinct": the z_j must be pairwise distinct; no solution is
    degenerate there (singleton blocks would force y = 0), so the split
    is trivially (0, total).

    variant="sys3": repeated z allowed; reports the degenerate /
    non-degenerate split, where degenerate means every block of equal
    z-indices has vanishing y-sum.
    """
    if r not in (1, 2, 3, 4):
        raise ValueError("r must be in 1..4")
    if variant not in ("distinct", "sys3"):
        raise ValueError("variant must be 'distinct' or 'sys3'")
    vals = _validate_values(values, n_bound)
    start = time.perf_counter()
    params = {"system": "homogeneous", "r": r, "variant": variant}

    if variant == "distinct":
        total = _count_homogeneous_distinct(r, n_bound, vals)
        return CountResult(
            total, 0, total, n_bound, params, time.perf_counter() - start
        )

    cost = _falling(n_bound, r) * (2 * n_bound + 1 if r == 4 else 1)
    if cost > 3_000_000:
        raise BudgetError(f"sys3 enumeration cost ~{cost:.2e} exceeds budget 3e6")

    total = 0
    degenerate = 0
    for part in _partitions_of(r):
        l = len(part)
        sizes = tuple(len(block) for block in part)
        prod_d = 1
        for m in sizes:
            prod_d *= _box_sum_count(m, n_bound, 0)
        degenerate += _falling(n_bound, l) * (prod_d - 1)
        for pos in permutations(range(n_bound), l):
            group_vals = tuple(vals[p] for p in pos)
            total += _group_solutions(group_vals, sizes, n_bound) - 1
    return CountResult(
        total, degenerate, total - degenerate, n_bound, params,
        time.perf_counter() - start,
    )


def _count_homogeneous_distinct(r: int, n_bound: int, vals: list[int]) -> int:
    if r == 1:
        return 0  # y1 a(z1) = 0 forces y1 = 0, excluded
    if r == 2:
        return 0  # y1 (a(z1) - a(z2)) = 0 with distinct z forces y = 0
    if r == 3:
        if math.comb(n_bound, 3) > 3_000_000:
            raise BudgetError("r=3 enumeration exceeds budget comb(N,3) <= 3e6")
        total = 0
        for i, j, k in combinations(range(n_bound), 3):
            # the per-tuple count is ordering-invariant; one ordering x 6
            cnt = _group_solutions((vals[i], vals[j], vals[k]), (1, 1, 1), n_bound)
            total += 6 * (cnt - 1)
        return total
    # r == 4
    if math.comb(n_bound, 4) * (2 * n_bound + 1) > 10_000_000:
        raise BudgetError("r=4 enumeration exceeds budget comb(N,4)*(2N+1) <= 1e7")
    total = 0
    for quad in combinations(range(n_bound), 4):
        cnt = _count_quad(tuple(vals[q] for q in quad), n_bound)
        total += 24 * (cnt - 1)
    return total


def iter_homogeneous_solutions(r: int, n_bound: int, values, variant: str = "sys3"):
    """Yield (y, z, is_degenerate) for every solution; small N only.

    Brute force over z and the first r-1 components of y.  Meant for
    fixture generation and witness re-checks, not production counting.
    """
    vals = _validate_values(values, n_bound)
    if (2 * n_bound + 1) ** (r - 1) * n_bound**r > 40_000_000:
        raise BudgetError("witness enumeration too large")
    y_range = range(-n_bound, n_bound + 1)

    def z_tuples():
        if variant == "distinct":
            return permutations(range(1, n_bound + 1), r)
        return _product_tuples(range(1, n_bound + 1), r)

    for z in z_tuples():
        a = [vals[zi - 1] for zi in z]
        for y_head in _product_tuples(y_range, r - 1):
            y_last = -sum(y_head)
            if abs(y_last) > n_bound:
                continue
            y = y_head + (y_last,)
            if all(v == 0 for v in y):
                continue
            if sum(yi * ai for yi, ai in zip(y, a)) != 0:
                continue
            blocks = {}
            for idx, zi in enumerate(z):
                blocks.setdefault(zi, []).append(idx)
            deg = all(sum(y[i] for i in idxs) == 0 for idxs in blocks.values())
            yield y, z, deg


def _product_tuples(rng, k: int):
    if k == 0:
        yield ()
        return
    for head in _product_tuples(rng, k - 1):
        for v in rng:
            yield head + (v,)


# ---------------------------------------------------------------------------
# pair equation and contrast equation (value joins on exact keys)


def _run_square_sum_int64(vals: np.ndarray) -> int:
    """Sum of multiplicity**2 over equal runs of a 1-d int64 array (sorted in place)."""
    vals.sort(kind="quicksort")
    if len(vals) == 0:
        return 0
    boundaries = np.flatnonzero(np.diff(vals)) + 1
    edges = np.concatenate([[0], boundaries, [len(vals)]])
    runs = np.diff(edges).astype(object)
    return int(np.sum(runs * runs))


def _scaled_stream(m: int, ds: Sequence[int]):
    for d in ds:
        yield m * d


def _run_square_sum_merge(iterables) -> int:
    """Same as above for pre-sorted big-int streams, via a lazy k-way merge."""
    total = 0
    prev = None
    run = 0
    for v in heapq.merge(*iterables):
        if v == prev:
            run += 1
        else:
            total += run * run
            prev, run = v, 1
    total += run * run
    return total


def count_pair_equation(k: int, n_bound: int, values) -> CountResult:
    """Exact count of the two-sided coefficient equation (order k).

    Computed as sum_v L(v)*R(v) over the exact value multisets of one
    side, minus the (m, m') = (0, 0) stratum.  For k = 2 the m = 0 terms
    are dropped before the join (they can only pair with themselves) and
    sign symmetry reduces the work fourfold.
    """
    if k not in (2, 3):
        raise ValueError("k must be 2 or 3")
    vals = _validate_values(values, n_bound)
    start = time.perf_counter()
    params = {"system": "pair_equation", "k": k}

    if k == 2:
        if n_bound < 2:
            # a distinct pair n_1 != n_2 <= N needs N >= 2
            return CountResult(0, None, None, n_bound, params, 0.0)
        if n_bound * n_bound * (n_bound - 1) // 2 > 10_000_000:
            raise BudgetError("k=2 join exceeds budget N*binom(N,2) <= 1e7")
        dpos = sorted(
            vals[i] - vals[j] for i in range(n_bound) for j in range(i)
        )
        max_v = n_bound * dpos[-1]
        if max_v < _INT64_SAFE:
            d_arr = np.array(dpos, dtype=np.int64)
            m_arr = np.arange(1, n_bound + 1, dtype=np.int64)
            products = np.multiply.outer(m_arr, d_arr).ravel()
            s2 = _run_square_sum_int64(products)
        else:
            s2 = _run_square_sum_merge(
                [_scaled_stream(m, dpos) for m in range(1, n_bound + 1)]
            )
        # (m>0,d>0) quadrant squared; signs give the factor 8, m=0 is excluded
        total = 8 * s2
        return CountResult(
            total, None, None, n_bound, params, time.perf_counter() - start
        )

    # k == 3: join over v = m1*d1 + m2*d2 with the full m-grid, then remove
    # the (m, m') = (0, 0) stratum
    if n_bound < 3:
        return CountResult(0, None, None, n_bound, params, 0.0)
    n_tuples = _falling(n_bound, 3)
    grid = (2 * n_bound + 1) ** 2
    if grid * n_tuples > 160_000_000:
        raise BudgetError("k=3 join exceeds budget (2N+1)**2 * N(N-1)(N-2) <= 1.6e8")
    max_v = 2 * n_bound * (vals[-1] - vals[0])
    if max_v >= _INT64_SAFE:
        raise BudgetError(
            "k=3 join needs |m . Delta| < 2**62; the sequence grows too fast "
            f"for N={n_bound}"
        )
    s2 = _join_square_sum_k3(n_bound, vals, include_zero=True)
    total = s2 - n_tuples * n_tuples
    return CountResult(total, None, None, n_bound, params, time.perf_counter() - start)


def _join_square_sum_k3(n_bound: int, vals: list[int], include_zero: bool) -> int:
    m_range = np.arange(-n_bound, n_bound + 1, dtype=np.int64)
    m1, m2 = np.meshgrid(m_range, m_range, indexing="ij")
    m1 = m1.ravel()
    m2 = m2.ravel()
    if not include_zero:
        keep = (m1 != 0) | (m2 != 0)
        m1, m2 = m1[keep], m2[keep]
    triples = list(permutations(range(n_bound), 3))
    varr = np.array(vals, dtype=np.int64)
    out = np.empty(len(m1) * len(triples), dtype=np.int64)
    chunk = max(1, 2_000_000 // max(len(m1), 1))
    pos = 0
    for lo in range(0, len(triples), chunk):
        part = triples[lo : lo + chunk]
        x1 = np.fromiter((t[0] for t in part), dtype=np.int64, count=len(part))
        x2 = np.fromiter((t[1] for t in part), dtype=np.int64, count=len(part))
        x3 = np.fromiter((t[2] for t in part), dtype=np.int64, count=len(part))
        d1 = varr[x1] - varr[x2]
        d2 = varr[x2] - varr[x3]
        block = m1[:, None] * d1[None, :] + m2[:, None] * d2[None, :]
        flat = block.ravel()
        out[pos : pos + len(flat)] = flat
        pos += len(flat)
    return _run_square_sum_int64(out)


def count_contrast_triple(n_bound: int, values) -> CountResult:
    """Exact count of the triple-correlation collision equation.

    Both coefficient pairs are required nonzero and the x-triples
    distinct; all variables bounded by N.  Used with a(x) = x**2 against
    a lacunary sequence to expose the polynomial clustering excess.
    """
    if n_bound < 3:
        return CountResult(0, None, None, n_bound,
                           {"system": "contrast_triple"}, 0.0)
    if n_bound > 24:
        raise BudgetError("contrast enumeration capped at N <= 24")
    vals = _validate_values(values, n_bound)
    start = time.perf_counter()
    max_v = 2 * n_bound * (vals[-1] - vals[0])
    if max_v >= _INT64_SAFE:
        raise BudgetError("contrast join needs |n . Delta| < 2**62")
    s2 = _join_square_sum_k3(n_bound, vals, include_zero=False)
    return CountResult(
        s2, None, None, n_bound,
        {"system": "contrast_triple"}, time.perf_counter() - start,
    )


# ---------------------------------------------------------------------------
# query front end


SYSTEMS = (
    "sandwich",
    "hyperplane_pair",
    "homogeneous",
    "pair_equation",
    "contrast_triple",
)


@dataclass(frozen=True)
class CountQuery:
    """One counting request: which system, its bound, and its parameters.

    The sequence-based systems (homogeneous, pair_equation,
    contrast_triple) take the sequence values at run time; the linear
    systems carry their coefficient data here.  Budgets are enforced by
    the underlying counters before any enumeration starts.
    """

    system: str
    n_bound: int
    r: int = 3
    k: int = 2
    variant: str = "distinct"
    coefficients: tuple[int, ...] = ()
    offset_b: int = 0
    offset_d: int = 0
    bound_c: object = 1

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}")
        if self.n_bound < 1:
            raise ValueError("bound must be positive")
        if self.r < 1 or self.k < 2:
            raise ValueError("need r >= 1 and k >= 2")

    def run(self, values=None) -> CountResult:
        if self.system == "sandwich":
            total = count_sandwich(
                self.coefficients, self.offset_b, self.bound_c, self.n_bound
            )
            return CountResult(total, None, None, self.n_bound,
                               {"system": self.system}, 0.0)
        if self.system == "hyperplane_pair":
            total = count_hyperplane_pair(
                self.coefficients, self.offset_b, self.offset_d,
                self.bound_c, self.n_bound,
            )
            return CountResult(total, None, None, self.n_bound,
                               {"system": self.system}, 0.0)
        if values is None:
            raise ValueError(f"{self.system} needs sequence values")
        if self.system == "homogeneous":
            return count_homogeneous(self.r, self.n_bound, values, self.variant)
        if self.system == "pair_equation":
            return count_pair_equation(self.k, self.n_bound, values)
        return count_contrast_triple(self.n_bound, values)


# ---------------------------------------------------------------------------
# growth-exponent fitting


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    log_amplitude: float
    residual: float
    n_points: int
    degenerate: bool


def fit_growth(counts: Sequence[tuple[int, int]], log_exponent: float = 0.0) -> GrowthFit:
    """Least-squares exponent p in count ~ A * N**p * (log N)**q, q fixed.

    Zero counts are dropped; if fewer than two positive points remain the
    fit is reported as degenerate rather than raised.
    """
    if len(counts) < 4:
        raise ValueError("need at least 4 data points")
    pts = [(n, c) for n, c in counts if c > 0]
    if len(pts) < 2:
        return GrowthFit(math.nan, math.nan, math.nan, len(pts), True)
    xs = np.array([math.log(n) for n, _ in pts])
    ys = np.array(
        [math.log(c) - log_exponent * math.log(math.log(n)) for n, c in pts]
    )
    design = np.column_stack([np.ones_like(xs), xs])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    fitted = design @ coef
    residual = float(np.sqrt(np.mean((ys - fitted) ** 2)))
    return GrowthFit(float(coef[1]), float(coef[0]), residual, len(pts), False)
