"""Exception hierarchy shared by every module."""


class HarmonicLiError(Exception):
    """Base class for all library errors."""


class DomainError(HarmonicLiError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class PrecisionExceeded(HarmonicLiError):
    """A certified decision needs more digits than ``max_refine_digits``."""


class IntegerBoundary(PrecisionExceeded):
    """An enclosure keeps straddling an integer after full precision escalation."""


class NoInteriorMax(HarmonicLiError):
    """The searched function shows no sign change of its derivative on the bracket."""


class LimitExceeded(HarmonicLiError, ValueError):
    """A prime-counting query exceeds the configured sieve cap."""


class MontgomeryVaughanViolation(HarmonicLiError, AssertionError):
    """A prime gap count broke the Montgomery-Vaughan inequality (an implementation bug)."""
