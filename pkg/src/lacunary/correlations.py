"""k-level correlation sums of fractional parts.

For a test function f on R**(k-1) and the difference vector
Delta(x) = (a(x_1)-a(x_2), ..., a(x_{k-1})-a(x_k)) the correlation sum is

    R_k(f, N) = (1/N) * sum over ordered k-tuples of distinct indices
                of F_N(alpha * Delta(x))

where F_N periodizes f at scale N.  Since N > 2*rho, only one lattice
translate survives and F_N(y) = f(N * wrap(y)) with wrap into
(-1/2, 1/2].  The coordinates of alpha*Delta(x) mod 1 are consecutive
circle differences of the fractional parts, which is what makes the
sorted order useful: a tuple can only contribute if every consecutive
pair of its points sits within rho/N on the circle, so the windowed
enumeration touches O(N log N + T*k) work for T contributing tuples
instead of N**k.

The Fourier route expands R_k in alpha:  R_k = N**-k sum_l b(l,N) e(l alpha)
with b(l,N) = sum over n in Z**(k-1) and tuples with n . Delta(x) = l of
fhat(n/N);  b(0,N)/N**k is the exact mean of R_k over alpha.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import BudgetError, NoFourierTransformError, TruncationError
from .fracparts import OrderedPoints

TEST_FUNCTION_KINDS = ("bump", "box", "triangle")

#: default Fourier truncation: |n|_inf <= 64 * N
DEFAULT_N_MAX_FACTOR = 64

_WINDOW_SLACK = 1e-9  # relative; the window may only over-approximate the support


def wrap_unit(y):
    """Map each coordinate to its representative in (-1/2, 1/2]."""
    return y - np.ceil(y - 0.5)


def falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


@lru_cache(maxsize=None)
def _bump_integral(dim: int, rho: float) -> float:
    # radial profile exp(1 - 1/(1 - (r/rho)**2)) over the dim-ball of radius rho
    surface = 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)
    val, _ = quad(
        lambda r: r ** (dim - 1) * math.exp(1.0 - 1.0 / (1.0 - (r / rho) ** 2)),
        0.0,
        rho,
        limit=200,
    )
    return surface * val


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported test function on R**dim.

    ``box``       indicator of the sup-norm box of radius rho
    ``triangle``  product of 1-d tents of half-width rho
    ``bump``      exp(1 - 1/(1 - |y/rho|**2)) on the Euclidean ball |y| < rho

    Box and triangle are not smooth; they exist for exact hand values and
    closed-form Fourier transforms.  The bump is the canonical smooth
    witness (no closed-form transform).
    """

    __test__ = False  # keep pytest from collecting the class

    kind: str
    dim: int
    rho: float

    def __post_init__(self):
        if self.kind not in TEST_FUNCTION_KINDS:
            raise ValueError(f"kind must be one of {TEST_FUNCTION_KINDS}")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.rho <= 0:
            raise ValueError("support radius must be positive")

    # -- evaluation ---------------------------------------------------

    def __call__(self, y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            if self.dim != 1:
                raise ValueError("scalar input only valid in dimension 1")
            arr = arr.reshape(1)
        if arr.shape[-1] != self.dim:
            raise ValueError(f"last axis must have length {self.dim}")
        if self.kind == "box":
            out = np.all(np.abs(arr) <= self.rho, axis=-1).astype(float)
        elif self.kind == "triangle":
            out = np.prod(np.maximum(0.0, 1.0 - np.abs(arr) / self.rho), axis=-1)
        else:
            r2 = np.sum((arr / self.rho) ** 2, axis=-1)
            out = np.zeros_like(r2)
            inside = r2 < 1.0
            with np.errstate(divide="ignore"):
                out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return float(out) if out.ndim == 0 else out

    @property
    def integral(self) -> float:
        """Exact for box and triangle, cached quadrature for the bump."""
        if self.kind == "box":
            return (2.0 * self.rho) ** self.dim
        if self.kind == "triangle":
            return self.rho**self.dim
        return _bump_integral(self.dim, self.rho)

    # -- Fourier side -------------------------------------------------

    @property
    def has_fourier(self) -> bool:
        return self.kind in ("box", "triangle")

    def fourier(self, xi):
        """fhat(xi) = integral of f(y) e(-xi . y) dy, closed form only.

        box:      prod sin(2 pi rho xi_i) / (pi xi_i)
        triangle: prod rho * sinc(rho xi_i)**2     (sinc(u) = sin(pi u)/(pi u))
        """
        if not self.has_fourier:
            raise NoFourierTransformError("bump has no closed-form transform")
        arr = np.asarray(xi, dtype=float)
        if arr.ndim == 0:
            if self.dim != 1:
                raise ValueError("scalar input only valid in dimension 1")
            arr = arr.reshape(1)
        if arr.shape[-1] != self.dim:
            raise ValueError(f"last axis must have length {self.dim}")
        if self.kind == "box":
            out = np.prod(2.0 * self.rho * np.sinc(2.0 * self.rho * arr), axis=-1)
        else:
            out = np.prod(self.rho * np.sinc(self.rho * arr) ** 2, axis=-1)
        return float(out) if out.ndim == 0 else out

    def fourier_sup_beyond(self, xi_min: float) -> float:
        """Upper bound for |fhat| on {|xi|_inf >= xi_min}."""
        if not self.has_fourier:
            raise NoFourierTransformError("bump has no closed-form transform")
        if self.kind == "box":
            one = min(2.0 * self.rho, 1.0 / (math.pi * xi_min)) if xi_min > 0 else 2.0 * self.rho
            return one * (2.0 * self.rho) ** (self.dim - 1)
        one = self.rho * min(1.0, 1.0 / (math.pi * self.rho * xi_min) ** 2) if xi_min > 0 else self.rho
        return one * self.rho ** (self.dim - 1)

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        h.update(repr((self.kind, self.dim, float(self.rho))).encode())
        return h.hexdigest()


def periodize(f: TestFunction, n: int, y) -> float:
    """F_N(y) = sum over integer translates of f(N(m+y)).

    Valid only for N > 2 rho, where at most the translate with
    N*wrap(y) in (-N/2, N/2] can meet the support.
    """
    if n <= 2 * f.rho:
        raise ValueError(f"N={n} too small for support radius {f.rho} (need N > 2 rho)")
    return f(n * wrap_unit(np.asarray(y, dtype=float)))


@dataclass(frozen=True)
class CorrelationResult:
    k: int
    n: int
    value: float
    tuple_count: int  # ordered tuples with a nonzero contribution
    method: str
    f_digest: str


def _check_inputs(points: OrderedPoints, k: int, f: TestFunction, k_max: int):
    if not 2 <= k <= k_max:
        raise ValueError(f"order must satisfy 2 <= k <= {k_max}")
    if f.dim != k - 1:
        raise ValueError(f"test function dimension {f.dim} != k-1 = {k - 1}")
    if points.n <= 2 * f.rho:
        raise ValueError(
            f"N={points.n} too small for support radius {f.rho} (need N > 2 rho)"
        )


def correlation_direct(
    points: OrderedPoints, k: int, f: TestFunction
) -> CorrelationResult:
    """R_k(f, N) via sliding-window enumeration over the sorted points.

    Only tuples whose consecutive circle distances are <= rho/N can
    contribute (per-coordinate pruning; sound for both the sup-norm box
    and the Euclidean ball inside it).  Every surviving tuple is
    evaluated through the same F_N as the naive enumeration, so the two
    agree to summation order.
    """
    _check_inputs(points, k, f, k_max=4)
    n = points.n
    theta = points.theta_sorted
    thr = (f.rho / n) * (1.0 + _WINDOW_SLACK)

    if k == 2:
        value, count = _pair_sum(theta, n, thr, f)
        return CorrelationResult(k, n, value, count, "windowed", f.digest())

    neighbors = _neighbor_table(theta, thr)
    rows = []
    stack_idx = [0] * k
    for start in range(n):
        stack_idx[0] = start
        _extend_chain(neighbors, stack_idx, 1, k, rows)
    if not rows:
        return CorrelationResult(k, n, 0.0, 0, "windowed", f.digest())
    coords = wrap_unit(np.array([
        [theta[row[i]] - theta[row[i + 1]] for i in range(k - 1)] for row in rows
    ]))
    vals = f(n * coords)
    return CorrelationResult(
        k, n, float(np.sum(vals) / n), int(np.count_nonzero(vals)), "windowed", f.digest()
    )


def _pair_sum(theta: np.ndarray, n: int, thr: float, f: TestFunction):
    """Vectorized k=2 path: each unordered close pair, both orientations."""
    aug = np.concatenate([theta, theta + 1.0])
    hi = np.searchsorted(aug, theta + thr, side="right")
    counts = np.minimum(hi - np.arange(n) - 1, n - 1)
    counts = np.maximum(counts, 0)
    total = int(counts.sum())
    if total == 0:
        return 0.0, 0
    anchors = np.repeat(np.arange(n), counts)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    j = np.arange(total) - starts[anchors] + anchors + 1
    diffs = aug[j] - theta[anchors]
    scaled = (n * diffs)[:, None]
    fwd = f(-scaled)  # tuple (anchor, partner): theta_anchor - theta_partner = -d
    bwd = f(scaled)
    value = (float(np.sum(fwd)) + float(np.sum(bwd))) / n
    count = int(np.count_nonzero(fwd)) + int(np.count_nonzero(bwd))
    return value, count


def _neighbor_table(theta: np.ndarray, thr: float) -> list[np.ndarray]:
    """Positions within circle distance thr of each sorted position."""
    n = len(theta)
    lo = np.searchsorted(theta, theta - thr, side="left")
    hi = np.searchsorted(theta, theta + thr, side="right")
    lo_wrap = np.searchsorted(theta, theta - thr + 1.0, side="left")
    hi_wrap = np.searchsorted(theta, theta + thr - 1.0, side="right")
    table = []
    for p in range(n):
        idx = np.arange(lo[p], hi[p])
        if theta[p] - thr < 0.0 and lo_wrap[p] < n:
            idx = np.concatenate([idx, np.arange(lo_wrap[p], n)])
        if theta[p] + thr >= 1.0 and hi_wrap[p] > 0:
            idx = np.concatenate([idx, np.arange(0, hi_wrap[p])])
        table.append(np.unique(idx))
    return table


def _extend_chain(neighbors, stack, depth, k, rows):
    if depth == k:
        rows.append(tuple(stack))
        return
    prefix = stack[:depth]
    for q in neighbors[stack[depth - 1]]:
        if q in prefix:
            continue
        stack[depth] = int(q)
        _extend_chain(neighbors, stack, depth + 1, k, rows)
    stack[depth] = 0


NAIVE_MAX_N = {2: 128, 3: 128, 4: 48}


def correlation_naive(
    points: OrderedPoints, k: int, f: TestFunction
) -> CorrelationResult:
    """Full enumeration over all ordered distinct index tuples (the oracle)."""
    _check_inputs(points, k, f, k_max=4)
    n = points.n
    if n > NAIVE_MAX_N[k]:
        raise BudgetError(f"naive enumeration capped at N={NAIVE_MAX_N[k]} for k={k}")
    theta = points.theta_by_index
    w = wrap_unit(theta[:, None] - theta[None, :])
    scaled = n * w
    ix = np.arange(n)
    if k == 2:
        coords = scaled[:, :, None]
        mask = ix[:, None] != ix[None, :]
    elif k == 3:
        c1 = np.broadcast_to(scaled[:, :, None], (n, n, n))
        c2 = np.broadcast_to(scaled[None, :, :], (n, n, n))
        coords = np.stack([c1, c2], axis=-1)
        i, j, l = ix[:, None, None], ix[None, :, None], ix[None, None, :]
        mask = (i != j) & (j != l) & (i != l)
    else:
        c1 = np.broadcast_to(scaled[:, :, None, None], (n, n, n, n))
        c2 = np.broadcast_to(scaled[None, :, :, None], (n, n, n, n))
        c3 = np.broadcast_to(scaled[None, None, :, :], (n, n, n, n))
        coords = np.stack([c1, c2, c3], axis=-1)
        i = ix[:, None, None, None]
        j = ix[None, :, None, None]
        l = ix[None, None, :, None]
        m = ix[None, None, None, :]
        mask = (
            (i != j) & (i != l) & (i != m) & (j != l) & (j != m) & (l != m)
        )
    vals = f(coords)
    vals = np.where(mask, vals, 0.0)
    return CorrelationResult(
        k, n, float(vals.sum() / n), int(np.count_nonzero(vals)), "naive", f.digest()
    )


# ---------------------------------------------------------------------------
# Fourier side


@dataclass(frozen=True)
class FourierCoefficient:
    l: int
    k: int
    n: int
    value: float
    tail_bound: float
    n_max: int


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


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _t_interval(base: int, step: int, bound: int) -> tuple[int, int]:
    """Integer t with |base + t*step| <= bound (step != 0); may be empty."""
    lo_num = -bound - base
    hi_num = bound - base
    if step > 0:
        return _ceil_div(lo_num, step), hi_num // step
    return _ceil_div(hi_num, step), lo_num // step


def fourier_b(
    l: int,
    n: int,
    k: int,
    f: TestFunction,
    values,
    n_max: Optional[int] = None,
    tol: Optional[float] = None,
) -> FourierCoefficient:
    """b(l, N): sum of fhat(n/N) over lattice vectors with n . Delta(x) = l.

    Truncated at |n|_inf <= n_max with a reported tail bound.  For k = 2
    the truncation is exact (vacuous) once n_max >= |l|, because any
    solution n of n * Delta = l has |n| <= |l|.  For k = 3 the box kind
    has a divergent worst-case tail bound (fhat decays like 1/|n| along
    solution lines); the triangle kind gives a finite bound.
    """
    if k not in (2, 3):
        raise ValueError("Fourier route supports k = 2 or 3")
    if not f.has_fourier:
        raise NoFourierTransformError("bump has no closed-form transform")
    if f.dim != k - 1:
        raise ValueError(f"test function dimension {f.dim} != k-1 = {k - 1}")
    values = list(values)[:n]
    if len(values) < n:
        raise ValueError(f"need at least {n} sequence values")
    if n_max is None:
        n_max = DEFAULT_N_MAX_FACTOR * n

    if k == 2:
        if n * n > 4_000_000:
            raise BudgetError("k=2 Fourier enumeration capped at N**2 <= 4e6")
        value, tail = _fourier_b_k2(l, n, f, values, n_max)
    else:
        est = falling(n, 3) * (2 * n_max + 1)
        if est > 50_000_000:
            raise BudgetError(
                f"k=3 Fourier enumeration cost ~{est:.2e} exceeds budget 5e7; "
                "reduce N or n_max"
            )
        value, tail = _fourier_b_k3(l, n, f, values, n_max)

    if tol is not None and tail > tol:
        raise TruncationError(f"tail bound {tail:.3e} exceeds tolerance {tol:.3e}")
    return FourierCoefficient(l=l, k=k, n=n, value=value, tail_bound=tail, n_max=n_max)


def _fourier_b_k2(l: int, n: int, f: TestFunction, values, n_max: int):
    total = 0.0
    if l == 0:
        # n = 0 solves every pair; n != 0 needs Delta = 0, impossible for
        # strictly increasing values
        total += f.fourier(0.0) * falling(n, 2)
        return total, 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            delta = values[i] - values[j]
            q, r = divmod(l, delta)
            if r == 0 and abs(q) <= n_max:
                total += f.fourier(q / n)
    # any solution has |n| = |l|/|Delta| <= |l|
    tail = 0.0 if n_max >= abs(l) else falling(n, 2) * f.fourier_sup_beyond((n_max + 1) / n)
    return total, tail


def _fourier_b_k3(l: int, n: int, f: TestFunction, values, n_max: int):
    total = 0.0
    tuples = 0
    for x1 in range(n):
        for x2 in range(n):
            if x2 == x1:
                continue
            d1 = values[x1] - values[x2]
            for x3 in range(n):
                if x3 == x1 or x3 == x2:
                    continue
                tuples += 1
                d2 = values[x2] - values[x3]
                g, u, v = _extended_gcd(d1, d2)
                if l % g:
                    continue
                scale = l // g
                base1, base2 = u * scale, v * scale
                step1, step2 = d2 // g, -(d1 // g)
                lo1, hi1 = _t_interval(base1, step1, n_max)
                lo2, hi2 = _t_interval(base2, step2, n_max)
                for t in range(max(lo1, lo2), min(hi1, hi2) + 1):
                    n1 = base1 + t * step1
                    n2 = base2 + t * step2
                    total += f.fourier(np.array([n1 / n, n2 / n]))
    if f.kind == "box":
        tail = math.inf
    else:
        # dyadic shells |n|_inf in [2**j n_max, 2**(j+1) n_max): at most
        # 4*2**j*n_max + 2 line solutions per tuple, fhat <= sup bound
        tail = 0.0
        shell = n_max
        for _ in range(60):
            bound = f.fourier_sup_beyond(shell / n)
            term = tuples * (4 * shell + 2) * bound
            tail += term
            if term < 1e-18:
                break
            shell *= 2
    return total, tail


def mean_via_b0(k: int, f: TestFunction, n: int, values) -> float:
    """Exact mean of R_k over alpha: b(0, N) / N**k."""
    return fourier_b(0, n, k, f, values).value / n**k


def stability_delta(
    points_n: OrderedPoints,
    points_nk: OrderedPoints,
    k: int,
    f: TestFunction,
    delta: float = 0.3,
) -> float:
    """|R_k(f, N+K) - R_k(f, N)| for point sets of the same alpha.

    Requires K <= N**(1-delta) for the configured delta in (0, 1).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    n = points_n.n
    kk = points_nk.n - n
    if kk < 0:
        raise ValueError("second point set must be the longer one")
    if kk > n ** (1.0 - delta):
        raise ValueError(f"K={kk} outside the regime K <= N**{1 - delta:.2f}")
    if points_n.alpha_digest != points_nk.alpha_digest:
        raise ValueError("point sets must come from the same alpha")
    r_n = correlation_direct(points_n, k, f).value
    r_nk = correlation_direct(points_nk, k, f).value
    return abs(r_nk - r_n)
