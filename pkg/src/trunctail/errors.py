"""Exception hierarchy shared across the package."""


class TruncTailError(Exception):
    """Base class for all trunctail errors."""


class ConfigurationError(TruncTailError, ValueError):
    """A model/spec object was built with invalid or non-finite fields."""


class ArgumentError(TruncTailError, ValueError):
    """An operation was called with out-of-range arguments."""


class DegenerateSampleError(TruncTailError):
    """The sample cannot support the requested statistic (all zero, zero denominator, ...)."""


class CannotBoundError(TruncTailError):
    """A tail-exponent upper bound cannot be formed (some grid estimate is zero)."""


class RTooLargeError(TruncTailError):
    """Exponential-Markov bound denominator is nonpositive; reduce r."""


class DomainError(TruncTailError, ValueError):
    """Evaluation requested outside the function's domain."""


class DataError(TruncTailError):
    """Input data could not be read or parsed."""
