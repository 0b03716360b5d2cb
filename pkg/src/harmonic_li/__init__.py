"""Certified harmonic-number approximations of the logarithmic integral and pi(x)."""

from .errors import (
    DomainError,
    HarmonicLiError,
    IntegerBoundary,
    LimitExceeded,
    MontgomeryVaughanViolation,
    NoInteriorMax,
    PrecisionExceeded,
)
from .numeric_core import Interval, PrecisionConfig, euler_gamma, exp_gamma, get_config, precision, set_config
from .shifts import Shift

__all__ = [
    "DomainError",
    "HarmonicLiError",
    "IntegerBoundary",
    "Interval",
    "LimitExceeded",
    "MontgomeryVaughanViolation",
    "NoInteriorMax",
    "PrecisionConfig",
    "PrecisionExceeded",
    "Shift",
    "euler_gamma",
    "exp_gamma",
    "get_config",
    "precision",
    "set_config",
]

__version__ = "0.1.0"
