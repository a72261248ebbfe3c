"""Integer sequence families whose fractional-part statistics are studied.

The sequences of interest satisfy the gap condition a(x+1) > c*a(x) for
some c > 1 (geometric and Fibonacci-type growth).  Polynomial sequences
a(x) = x**d are deliberately included as the non-lacunary contrast
class: their clustering behaviour is what the lacunary results are
measured against.  All values are exact Python integers; nothing here
ever rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .errors import InvalidSpecError, ResourceLimitError

#: Default cap on the bit length of the largest materialized value a(N).
DEFAULT_BIT_BUDGET = 1 << 22

KINDS = ("geometric", "fibonacci", "polynomial", "explicit")


def _default_gap(kind: str, base: int) -> Optional[Fraction]:
    if kind == "geometric":
        # any rational < base works; halfway is a comfortable claim
        return Fraction(2 * base - 1, 2)
    if kind == "fibonacci":
        # ratios tend to the golden mean from x=2 on; 3/2 is safely below
        return Fraction(3, 2)
    return None  # polynomial is not lacunary; explicit carries no default claim


@dataclass(frozen=True)
class SequenceSpec:
    """Declarative description of one integer sequence family.

    kind:
        ``geometric``   a(x) = base**x with base >= 2
        ``fibonacci``   a(1), a(2) = seed_pair, then a(x) = a(x-1) + a(x-2)
        ``polynomial``  a(x) = x**degree (contrast class, NOT lacunary)
        ``explicit``    a fixed strictly increasing list of positive integers

    gap_constant / gap_start express the claimed gap condition
    a(x+1) > gap_constant * a(x) for all x >= gap_start.  The claim is
    checkable with verify_gap; for polynomial kind it is None because no
    such constant exists for large N.
    """

    kind: str
    base: int = 2
    degree: int = 2
    seed_pair: tuple[int, int] = (1, 2)
    values: tuple[int, ...] = ()
    gap_constant: Optional[Fraction] = None
    gap_start: int = 0  # 0 means "use the kind's default"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpecError(f"unknown sequence kind {self.kind!r}")
        if self.kind == "geometric" and self.base < 2:
            raise InvalidSpecError("geometric base must be >= 2")
        if self.kind == "polynomial" and self.degree < 1:
            raise InvalidSpecError("polynomial degree must be >= 1")
        if self.kind == "fibonacci":
            s0, s1 = self.seed_pair
            if s0 < 1 or s1 <= s0:
                raise InvalidSpecError("fibonacci seed pair must be 0 < s0 < s1")
        if self.kind == "explicit":
            if not self.values:
                raise InvalidSpecError("explicit sequence needs at least one value")
            if self.values[0] < 1 or any(
                b <= a for a, b in zip(self.values, self.values[1:])
            ):
                raise InvalidSpecError(
                    "explicit values must be strictly increasing positive integers"
                )
        if self.gap_constant is None:
            object.__setattr__(self, "gap_constant", _default_gap(self.kind, self.base))
        elif self.gap_constant <= 1:
            raise InvalidSpecError("gap constant must exceed 1")
        if self.gap_start == 0:
            object.__setattr__(self, "gap_start", 2 if self.kind == "fibonacci" else 1)

    @property
    def is_lacunary(self) -> bool:
        """Whether the family satisfies the gap condition eventually."""
        return self.kind != "polynomial" and self.gap_constant is not None

    def label(self) -> str:
        if self.kind == "geometric":
            return f"geometric(g={self.base})"
        if self.kind == "polynomial":
            return f"polynomial(d={self.degree})"
        if self.kind == "fibonacci":
            return f"fibonacci{self.seed_pair}"
        return f"explicit(len={len(self.values)})"

    def describe(self) -> dict:
        """Canonical dict form, used in config digests and CSV metadata."""
        out = {"kind": self.kind}
        if self.kind == "geometric":
            out["base"] = self.base
        elif self.kind == "polynomial":
            out["degree"] = self.degree
        elif self.kind == "fibonacci":
            out["seed_pair"] = list(self.seed_pair)
        else:
            out["values"] = [str(v) for v in self.values]
        return out


def spec_from_dict(d: dict) -> SequenceSpec:
    kind = d["kind"]
    if kind == "geometric":
        return SequenceSpec("geometric", base=int(d.get("base", 2)))
    if kind == "polynomial":
        return SequenceSpec("polynomial", degree=int(d.get("degree", 2)))
    if kind == "fibonacci":
        s = d.get("seed_pair", (1, 2))
        return SequenceSpec("fibonacci", seed_pair=(int(s[0]), int(s[1])))
    if kind == "explicit":
        return SequenceSpec("explicit", values=tuple(int(v) for v in d["values"]))
    raise InvalidSpecError(f"unknown sequence kind {kind!r}")


def last_value(spec: SequenceSpec, n: int) -> int:
    """a(n) without materializing the whole prefix (cheap for all kinds)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if spec.kind == "geometric":
        return spec.base**n
    if spec.kind == "polynomial":
        return n**spec.degree
    if spec.kind == "fibonacci":
        a, b = spec.seed_pair
        for _ in range(n - 1):
            a, b = b, a + b
        return a
    if n > len(spec.values):
        raise InvalidSpecError(
            f"explicit sequence has only {len(spec.values)} values, asked for {n}"
        )
    return spec.values[n - 1]


def generate(
    spec: SequenceSpec, n: int, bit_budget: int = DEFAULT_BIT_BUDGET
) -> list[int]:
    """Materialize a(1), ..., a(n) exactly.

    Raises ResourceLimitError if a(n) would exceed `bit_budget` bits;
    the check runs before the bulk of the work for the growing kinds.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if spec.kind == "geometric":
        # predictable size: a(n) has ~ n*log2(base) bits
        est_bits = n * spec.base.bit_length()
        if est_bits > bit_budget:
            raise ResourceLimitError(
                f"a({n}) needs ~{est_bits} bits, budget is {bit_budget}"
            )
        out = []
        v = 1
        for _ in range(n):
            v *= spec.base
            out.append(v)
        return out
    if spec.kind == "polynomial":
        if spec.degree * n.bit_length() > bit_budget:
            raise ResourceLimitError("polynomial value exceeds bit budget")
        return [x**spec.degree for x in range(1, n + 1)]
    if spec.kind == "fibonacci":
        a, b = spec.seed_pair
        out = [a, b]
        while len(out) < n:
            out.append(out[-1] + out[-2])
            if out[-1].bit_length() > bit_budget:
                raise ResourceLimitError("fibonacci value exceeds bit budget")
        return out[:n]
    # explicit
    if n > len(spec.values):
        raise InvalidSpecError(
            f"explicit sequence has only {len(spec.values)} values, asked for {n}"
        )
    if spec.values[n - 1].bit_length() > bit_budget:
        raise ResourceLimitError("explicit value exceeds bit budget")
    return list(spec.values[:n])


@dataclass(frozen=True)
class GapCheck:
    ok: bool
    first_violation: Optional[int]  # smallest x >= start with a(x+1) <= c*a(x)


def verify_gap(values: Iterable[int], c: Fraction, start: int = 1) -> GapCheck:
    """Check a(x+1) > c*a(x) for all x >= start, by exact rational comparison.

    Indices are 1-based to match the a(1..N) convention.  Returns the
    smallest violating x when the check fails.
    """
    vals = list(values)
    if not vals:
        raise ValueError("values must be nonempty")
    c = Fraction(c)
    if c <= 1:
        raise ValueError("gap constant must exceed 1")
    for x in range(max(start, 1), len(vals)):
        # a(x+1) > c*a(x)  <=>  a(x+1)*den > num*a(x), all exact integers
        if vals[x] * c.denominator <= c.numerator * vals[x - 1]:
            return GapCheck(False, x)
    return GapCheck(True, None)
