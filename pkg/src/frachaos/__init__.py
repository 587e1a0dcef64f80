"""Chaos-expansion solver for linear Skorohod equations with rough fBm noise (alpha = 1/2 - H in (0, 1/2))."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DecompositionError,
    FrachaosError,
    InvalidArgument,
    InvalidData,
    NotInSpace,
)
from .fraccalc import FracOrder, frac_derivative, frac_integral  # noqa: E402
from .grid import Grid, SampledFunction, make_grid  # noqa: E402

__all__ = [
    "ConfigError",
    "DecompositionError",
    "FracOrder",
    "FrachaosError",
    "Grid",
    "InvalidArgument",
    "InvalidData",
    "NotInSpace",
    "SampledFunction",
    "frac_derivative",
    "frac_integral",
    "make_grid",
]
