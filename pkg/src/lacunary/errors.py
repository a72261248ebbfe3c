"""Exception types shared across the package."""


class InvalidSpecError(ValueError):
    """A sequence description is malformed (bad base, non-increasing list, ...)."""


class ResourceLimitError(RuntimeError):
    """A materialization would exceed its configured bit budget."""


class BudgetError(RuntimeError):
    """An enumeration would exceed its configured cost budget."""


class InsufficientPrecisionError(ValueError):
    """alpha carries too few bits for the requested sequence length and guard."""


class PrecisionMarginError(RuntimeError):
    """A strict comparison fell inside the numerical error margin; rerun at higher precision."""


class NoFourierTransformError(ValueError):
    """The test function has no closed-form Fourier transform (smooth bump)."""


class TruncationError(ValueError):
    """The Fourier tail bound exceeds the requested tolerance at the configured cutoff."""


class ConfigError(ValueError):
    """An experiment configuration fails schema validation."""
