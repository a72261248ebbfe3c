"""Spacing statistics of fractional parts of lacunary sequences.

The pipeline: generate an integer sequence a(x), pick an alpha (seeded
fixed-point or exact rational), compute the fractional parts
{alpha a(x)} at controlled precision, and measure their local spacing
statistics (nearest-neighbour spacings, joint spacings, interval
occupancy, k-level correlation sums) against the Poisson model.  The
counting module independently validates the Diophantine solution bounds
that drive those statistics, and the harness packages everything into
seeded, replayable experiments.
"""

from .correlations import (
    CorrelationResult,
    TestFunction,
    correlation_direct,
    correlation_naive,
    fourier_b,
    mean_via_b0,
    periodize,
    stability_delta,
)
from .counting import (
    CountQuery,
    CountResult,
    GrowthFit,
    count_contrast_triple,
    count_homogeneous,
    count_hyperplane_pair,
    count_pair_equation,
    count_sandwich,
    fit_growth,
)
from .fracparts import (
    FixedPointAlpha,
    OrderedPoints,
    alpha_from_rational,
    frac_parts,
    required_precision,
    sample_alpha,
)
from .harness import ExperimentRecord, report, run_experiment
from .poisson_model import (
    interval_count_pmf,
    joint_spacing_pdf,
    level_spacing_cdf,
    level_spacing_pdf,
)
from .sequences import GapCheck, SequenceSpec, generate, verify_gap
from .smallparts import (
    IntervalUnion,
    WindowCensus,
    exceptional_fraction,
    g_count,
    g_max,
    lambda_measure,
)
from .spacings import (
    OccupancyHistogram,
    SpacingSample,
    interval_counts,
    joint_spacings,
    ks_distance,
    normalized_spacings,
)

__version__ = "0.1.0"

__all__ = [
    "CorrelationResult",
    "CountQuery",
    "CountResult",
    "ExperimentRecord",
    "FixedPointAlpha",
    "GapCheck",
    "GrowthFit",
    "IntervalUnion",
    "OccupancyHistogram",
    "OrderedPoints",
    "SequenceSpec",
    "SpacingSample",
    "TestFunction",
    "WindowCensus",
    "alpha_from_rational",
    "correlation_direct",
    "correlation_naive",
    "count_contrast_triple",
    "count_homogeneous",
    "count_hyperplane_pair",
    "count_pair_equation",
    "count_sandwich",
    "exceptional_fraction",
    "fit_growth",
    "fourier_b",
    "frac_parts",
    "g_count",
    "g_max",
    "generate",
    "interval_count_pmf",
    "interval_counts",
    "joint_spacing_pdf",
    "joint_spacings",
    "ks_distance",
    "lambda_measure",
    "level_spacing_cdf",
    "level_spacing_pdf",
    "mean_via_b0",
    "normalized_spacings",
    "periodize",
    "report",
    "required_precision",
    "run_experiment",
    "sample_alpha",
    "stability_delta",
    "verify_gap",
]
