"""Exception types shared across the package."""


class FrachaosError(Exception):
    """Base class for all errors raised by frachaos."""


class InvalidArgument(FrachaosError, ValueError):
    """A parameter is outside its admissible range."""


class InvalidData(FrachaosError, ValueError):
    """Sampled data contains NaN or infinite values."""


class NotInSpace(FrachaosError, ValueError):
    """A function failed the membership diagnostic for the weighted space."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DecompositionError(FrachaosError, ArithmeticError):
    """A covariance matrix could not be factorized."""


class ConfigError(FrachaosError, ValueError):
    """A configuration file is malformed or violates a constraint."""
