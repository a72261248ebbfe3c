import numpy as np
import pytest

from lacunary import (
    OrderedPoints,
    SequenceSpec,
    frac_parts,
    generate,
    required_precision,
    sample_alpha,
)


@pytest.fixture(scope="session")
def geometric2():
    return SequenceSpec("geometric", base=2)


@pytest.fixture(scope="session")
def pipeline_points(geometric2):
    """Factory: seeded fractional parts of alpha * 2**x."""

    def make(seed: int, n: int, guard: int = 48) -> OrderedPoints:
        values = generate(geometric2, n)
        alpha = sample_alpha(seed, required_precision(geometric2, n, guard))
        return frac_parts(alpha, values, guard)

    return make


@pytest.fixture()
def grid_points():
    """Exactly representable (dyadic) grid, so boundary cases are exact."""

    def make(n: int) -> OrderedPoints:
        assert n & (n - 1) == 0, "use powers of two for exact grids"
        return OrderedPoints.from_theta(np.arange(n) / n)

    return make
