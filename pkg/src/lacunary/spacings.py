"""Local spacing observables: level-a spacings, joint spacings, interval counts.

Given the ordered fractional parts theta_1 <= ... <= theta_N, the
normalized level-a spacing at n is N * (theta_{n+a} - theta_n).  The
default mode treats the points as living on the circle, wrapping the
last a spacings around 0/1; the linear mode stops at n = N - a.  The
circular sum of level-1 spacings telescopes to exactly N, which makes
it a useful self-check downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .fracparts import OrderedPoints

MODES = ("circular", "linear")


@dataclass(frozen=True)
class SpacingSample:
    level: int
    mode: str
    n: int
    deltas: np.ndarray  # normalized, dimensionless


def normalized_spacings(
    points: OrderedPoints, level: int = 1, mode: str = "circular"
) -> SpacingSample:
    """Spacings between a-th neighbours in the sorted fractional parts."""
    theta = points.theta_sorted
    n = points.n
    if not 1 <= level < n:
        raise ValueError(f"level must satisfy 1 <= a < N, got a={level}, N={n}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "linear":
        deltas = n * (theta[level:] - theta[:-level])
    else:
        wrapped = np.concatenate([theta, theta[:level] + 1.0])
        deltas = n * (wrapped[level:] - wrapped[:-level])
    return SpacingSample(level=level, mode=mode, n=n, deltas=deltas)


def joint_spacings(
    points: OrderedPoints, window: int, mode: str = "circular"
) -> np.ndarray:
    """Consecutive level-1 spacing tuples (delta_n, ..., delta_{n+r-1}).

    Returns an array of shape (N, r) in circular mode and (N - r, r) in
    linear mode.  window = 1 reproduces normalized_spacings(level=1).
    """
    n = points.n
    if not 1 <= window < n:
        raise ValueError(f"window must satisfy 1 <= r < N, got r={window}, N={n}")
    base = normalized_spacings(points, level=1, mode=mode).deltas
    if mode == "circular":
        ext = np.concatenate([base, base[: window - 1]])
        count = n
    else:
        ext = base  # N-1 spacings -> N-r windows
        count = n - window
    return np.lib.stride_tricks.sliding_window_view(ext, window)[:count].copy()


@dataclass(frozen=True)
class OccupancyHistogram:
    """Empirical distribution of point counts in random arcs of length lam/N."""

    lam: float
    trials: int
    counts: Dict[int, int]

    def frequency(self, k: int) -> float:
        return self.counts.get(k, 0) / self.trials

    def frequencies(self) -> Dict[int, float]:
        return {k: c / self.trials for k, c in sorted(self.counts.items())}

    def mean(self) -> float:
        return sum(k * c for k, c in self.counts.items()) / self.trials


def interval_counts(
    points: OrderedPoints, lam: float, trials: int, seed: int
) -> OccupancyHistogram:
    """Occupancy statistics of uniformly placed arcs of length lam/N.

    Each trial draws a left endpoint uniformly on the circle and counts
    the points in the half-open arc [left, left + lam/N).  Reproducible
    from the seed (PCG64).
    """
    n = points.n
    if not 0 < lam <= n:
        raise ValueError("need 0 < lambda <= N")
    if trials < 1:
        raise ValueError("need at least one trial")
    theta = points.theta_sorted
    width = lam / n
    rng = np.random.Generator(np.random.PCG64(seed))
    left = rng.random(trials)
    right = left + width
    # count in [left, right): searchsorted('left') excludes boundary hits on the right
    lo = np.searchsorted(theta, left, side="left")
    hi = np.searchsorted(theta, np.minimum(right, 1.0), side="left")
    occupancy = hi - lo
    wrap = right > 1.0
    if np.any(wrap):
        occupancy[wrap] += np.searchsorted(theta, right[wrap] - 1.0, side="left")
    ks, cs = np.unique(occupancy, return_counts=True)
    return OccupancyHistogram(
        lam=lam, trials=trials, counts={int(k): int(c) for k, c in zip(ks, cs)}
    )


def ks_distance(samples, cdf: Callable[[float], float]) -> float:
    """Kolmogorov-Smirnov distance between samples and a reference cdf.

    sup over the sample points of both one-sided gaps between the
    empirical distribution function and cdf.
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = len(xs)
    if n == 0:
        raise ValueError("samples must be nonempty")
    ref = np.fromiter((cdf(x) for x in xs), dtype=float, count=n)
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - ref)
    d_minus = np.max(ref - (grid - 1.0 / n))
    return float(max(d_plus, d_minus, 0.0))


def spacing_histogram(
    sample: SpacingSample, bin_width: float = 0.1, s_max: float = 10.0
):
    """Fixed-width histogram of spacings on [0, s_max] plus an overflow bin.

    Returns (edges, counts, densities); the overflow bin has no density.
    """
    nbins = int(round(s_max / bin_width))
    edges = np.linspace(0.0, s_max, nbins + 1)
    counts, _ = np.histogram(sample.deltas, bins=edges)
    overflow = int(np.sum(sample.deltas >= s_max))
    total = len(sample.deltas)
    densities = counts / (total * bin_width)
    return edges, np.append(counts, overflow), densities
