"""Fractional parts theta_x = {alpha * a(x)} with rigorously bounded error.

alpha is held as a P-bit binary fixed-point fraction, so each fractional
part is one exact big-integer multiply and a mask:

    {alpha * a(x)} = (mantissa * a(x) mod 2**P) / 2**P      (exactly)

The only approximation is the truncation of alpha itself at P bits and
the final conversion to float64.  With

    P >= ceil(log2 a(N)) + ceil(log2 N) + guard

the truncation contributes at most a(N) * 2**-P <= 2**-guard / N per
point, and the float64 conversion at most 2**-53, so every theta carries
at least `guard` trustworthy bits.  All statistics downstream use
windows no finer than 2**-40, far above the default guard of 48 bits.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InsufficientPrecisionError, ResourceLimitError
from .seeds import stream_bits
from .sequences import SequenceSpec, last_value

DEFAULT_GUARD = 48
MIN_PRECISION = 64
MAX_PRECISION = 1 << 24  # bits; far beyond any desk-scale run

_TOP = 64  # float64 conversion reads the top 64 bits of each fraction
_TOP_SCALE = float(1 << _TOP)


def ceil_log2(v: int) -> int:
    """ceil(log2 v) for a positive integer, exactly."""
    if v < 1:
        raise ValueError("v must be positive")
    return (v - 1).bit_length()


@dataclass(frozen=True)
class FixedPointAlpha:
    """An alpha in [0,1) as mantissa / 2**precision_bits, with provenance."""

    mantissa: int
    precision_bits: int
    provenance: str

    def __post_init__(self):
        if self.precision_bits < MIN_PRECISION:
            raise ValueError(f"precision must be >= {MIN_PRECISION} bits")
        if not 0 <= self.mantissa < (1 << self.precision_bits):
            raise ValueError("mantissa out of range for precision")

    def value(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.precision_bits)

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        h.update(self.precision_bits.to_bytes(8, "big"))
        h.update(self.mantissa.to_bytes((self.precision_bits + 7) // 8, "big"))
        return h.hexdigest()


def sample_alpha(seed: int, precision_bits: int) -> FixedPointAlpha:
    """Draw alpha uniformly from [0, 2**P) / 2**P, reproducibly from `seed`.

    Uses the blake2b counter stream, so the same seed at higher precision
    extends the same binary expansion (the top bits are unchanged).
    """
    return FixedPointAlpha(
        mantissa=stream_bits(seed, precision_bits),
        precision_bits=precision_bits,
        provenance=f"seed:{seed}",
    )


def alpha_from_rational(p: int, q: int, precision_bits: int) -> FixedPointAlpha:
    """Nearest-below P-bit fixed-point representation of p/q in [0, 1)."""
    if q <= 0 or not 0 <= p < q:
        raise ValueError("need 0 <= p < q")
    return FixedPointAlpha(
        mantissa=(p << precision_bits) // q,
        precision_bits=precision_bits,
        provenance=f"rational:{p}/{q}",
    )


def required_precision(spec: SequenceSpec, n: int, guard: int = DEFAULT_GUARD) -> int:
    """Bits of alpha needed so every theta_x keeps >= guard accurate bits."""
    if guard < DEFAULT_GUARD:
        raise ValueError(f"guard must be >= {DEFAULT_GUARD}")
    p = ceil_log2(last_value(spec, n)) + ceil_log2(n) + guard
    p = max(p, MIN_PRECISION)
    if p > MAX_PRECISION:
        raise ResourceLimitError(f"required precision {p} exceeds {MAX_PRECISION}")
    return p


def required_precision_for_values(values, guard: int = DEFAULT_GUARD) -> int:
    p = ceil_log2(max(values)) + ceil_log2(len(values)) + guard
    return max(p, MIN_PRECISION)


@dataclass(frozen=True)
class OrderedPoints:
    """The first N fractional parts, both in index order and sorted.

    theta_sorted is ascending (stable sort; exact duplicates are kept,
    the multiset is what matters downstream).  eps_theta bounds the
    distance of every stored value from the true {alpha * a(x)}; it is
    0.0 for synthetic point sets built directly from floats.
    """

    theta_sorted: np.ndarray
    theta_by_index: np.ndarray
    alpha_digest: str
    eps_theta: float

    @property
    def n(self) -> int:
        return len(self.theta_sorted)

    @classmethod
    def from_theta(cls, theta, digest: str = "synthetic", eps: float = 0.0):
        by_index = np.asarray(theta, dtype=float)
        if by_index.ndim != 1 or len(by_index) == 0:
            raise ValueError("theta must be a nonempty 1-d array")
        if np.any(by_index < 0) or np.any(by_index >= 1):
            raise ValueError("theta values must lie in [0, 1)")
        return cls(
            theta_sorted=np.sort(by_index, kind="stable"),
            theta_by_index=by_index,
            alpha_digest=digest,
            eps_theta=eps,
        )


def frac_parts(
    alpha: FixedPointAlpha, values, guard: int = DEFAULT_GUARD
) -> OrderedPoints:
    """Compute {alpha * a(x)} for the given exact integer values.

    Requires alpha.precision_bits >= required precision for the values
    at the given guard, so the result error is below 2**-guard.
    """
    values = list(values)
    need = required_precision_for_values(values, guard)
    p = alpha.precision_bits
    if p < need:
        raise InsufficientPrecisionError(
            f"alpha has {p} bits, need >= {need} for N={len(values)} at guard {guard}"
        )
    m = alpha.mantissa
    mask = (1 << p) - 1
    shift = p - _TOP
    theta = np.fromiter(
        ((((m * v) & mask) >> shift) / _TOP_SCALE for v in values),
        dtype=float,
        count=len(values),
    )
    # a fraction within 2**-64 of 1 rounds up to 1.0; pin it back below
    np.copyto(theta, 1.0 - 2.0**-53, where=theta >= 1.0)
    # truncation of alpha at P bits + top-64 cut + float conversion
    # (exponent arithmetic: a(N) itself may overflow float range)
    eps = math.ldexp(1.0, ceil_log2(max(values)) - p) + 2.0**-_TOP + 2.0**-53
    return OrderedPoints(
        theta_sorted=np.sort(theta, kind="stable"),
        theta_by_index=theta,
        alpha_digest=alpha.digest(),
        eps_theta=eps,
    )
