"""Outward-rounded interval arithmetic, Bernoulli numbers and Euler's constant.

Every analytic quantity in the package is carried as an :class:`Interval`
whose endpoints are binary floating-point numbers (mpmath raw ``mpf`` tuples).
Endpoints are rounded outward at the current working precision, so the exact
real value of each computation is always inside the returned enclosure.

Precision is read from a :class:`PrecisionConfig`; the process-wide default
comes from ``HARMONIC_LI_DIGITS`` (40 digits if unset) and can be changed
temporarily with :func:`precision`.
"""

from __future__ import annotations

import math
import os
import threading
import warnings
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterator, Union

import mpmath
from mpmath.libmp import (
    fone,
    fzero,
    from_float,
    from_int,
    from_rational,
    mpf_add,
    mpf_cmp,
    mpf_exp,
    mpf_log,
    mpf_pi,
    mpf_sign,
    mpf_sub,
    round_ceiling,
    round_floor,
    to_rational,
)
from mpmath.libmp import libmpi

from .errors import DomainError, IntegerBoundary, PrecisionExceeded

LOG2_10 = math.log2(10)
GUARD_BITS = 8
DIGITS_ENV = "HARMONIC_LI_DIGITS"


def digits_to_bits(digits: int) -> int:
    return int(math.ceil(digits * LOG2_10)) + GUARD_BITS


@dataclass(frozen=True)
class PrecisionConfig:
    working_digits: int = 40
    max_refine_digits: int = 200

    def __post_init__(self) -> None:
        if self.working_digits < 15:
            raise DomainError(f"working_digits must be >= 15, got {self.working_digits}")
        if self.max_refine_digits < self.working_digits:
            raise DomainError("max_refine_digits must be >= working_digits")

    @property
    def bits(self) -> int:
        return digits_to_bits(self.working_digits)


def config_from_env() -> PrecisionConfig:
    """Configuration named by ``HARMONIC_LI_DIGITS``; DomainError if it is invalid."""
    raw = os.environ.get(DIGITS_ENV)
    if not raw:
        return PrecisionConfig()
    try:
        digits = int(raw)
    except ValueError as exc:
        raise DomainError(f"{DIGITS_ENV}={raw!r} is not an integer") from exc
    return PrecisionConfig(working_digits=digits, max_refine_digits=max(200, digits))


def _config_from_env() -> PrecisionConfig:
    try:
        return config_from_env()
    except DomainError as exc:
        # importing must not fail; the command line reports the bad value
        warnings.warn(f"ignoring {DIGITS_ENV}: {exc}", RuntimeWarning, stacklevel=2)
        return PrecisionConfig()


_global_config = _config_from_env()
_local_config: ContextVar[PrecisionConfig | None] = ContextVar("harmonic_li_precision", default=None)


def get_config() -> PrecisionConfig:
    cfg = _local_config.get()
    return _global_config if cfg is None else cfg


def set_config(config: PrecisionConfig) -> None:
    """Replace the process-wide default configuration."""
    global _global_config
    _global_config = config


@contextmanager
def precision(working_digits: int | None = None, max_refine_digits: int | None = None) -> Iterator[PrecisionConfig]:
    """Temporarily run with a different working precision.

    ``max_refine_digits`` follows ``working_digits`` upward when needed so that
    escalation loops never see an inconsistent configuration.
    """
    cfg = get_config()
    wd = cfg.working_digits if working_digits is None else working_digits
    md = cfg.max_refine_digits if max_refine_digits is None else max_refine_digits
    new = replace(cfg, working_digits=wd, max_refine_digits=max(md, wd))
    token = _local_config.set(new)
    try:
        yield new
    finally:
        _local_config.reset(token)


def _prec() -> int:
    return get_config().bits


# --------------------------------------------------------------------------
# Interval
# --------------------------------------------------------------------------

Number = Union[int, Fraction, float, str]


def _down_one_ulp(x, prec: int):
    if x == fzero:
        return mpf_sub(fzero, (0, 1, -prec - 1000, 1), prec, round_floor)
    sign, man, exp, bc = x
    return mpf_sub(x, (0, 1, exp + bc - prec, 1), prec, round_floor)


def _up_one_ulp(x, prec: int):
    if x == fzero:
        return mpf_add(fzero, (0, 1, -prec - 1000, 1), prec, round_ceiling)
    sign, man, exp, bc = x
    return mpf_add(x, (0, 1, exp + bc - prec, 1), prec, round_ceiling)


def _raw_to_fraction(x) -> Fraction:
    p, q = to_rational(x)
    return Fraction(int(p), int(q))


def _scalar_bounds(value, prec: int):
    if isinstance(value, bool):
        raise TypeError("bool is not a numeric interval endpoint")
    if isinstance(value, int):
        return from_int(value, prec, round_floor), from_int(value, prec, round_ceiling)
    if isinstance(value, str):
        value = Fraction(value.strip())
    if isinstance(value, Fraction):
        p, q = value.numerator, value.denominator
        return from_rational(p, q, prec, round_floor), from_rational(p, q, prec, round_ceiling)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r}")
        raw = from_float(value)
        return raw, raw
    if isinstance(value, mpmath.mpf):
        raw = value._mpf_
        return raw, raw
    raise TypeError(f"cannot build an interval from {type(value).__name__}")


class Interval:
    """Closed interval ``[lo, hi]`` that certainly contains a real number.

    Construct from exact scalars (``int``, ``Fraction``, decimal ``str``,
    binary ``float``) or a pair of them.  Arithmetic with plain scalars
    coerces them to tight enclosures first.
    """

    __slots__ = ("_a", "_b")

    def __init__(self, lo: Number | "Interval", hi: Number | None = None):
        if isinstance(lo, Interval):
            self._a, self._b = lo._a, lo._b
            return
        prec = _prec()
        a, b = _scalar_bounds(lo, prec)
        if hi is not None:
            _, b = _scalar_bounds(hi, prec)
        if mpf_cmp(a, b) > 0:
            raise DomainError("interval lower endpoint exceeds upper endpoint")
        self._a, self._b = a, b

    @classmethod
    def _raw(cls, a, b) -> "Interval":
        obj = cls.__new__(cls)
        obj._a = a
        obj._b = b
        return obj

    @classmethod
    def hull(cls, *items: "Interval") -> "Interval":
        a = items[0]._a
        b = items[0]._b
        for it in items[1:]:
            if mpf_cmp(it._a, a) < 0:
                a = it._a
            if mpf_cmp(it._b, b) > 0:
                b = it._b
        return cls._raw(a, b)

    # -- accessors --------------------------------------------------------
    @property
    def lo(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(self._a)

    @property
    def hi(self) -> mpmath.mpf:
        return mpmath.mp.make_mpf(self._b)

    @property
    def lo_fraction(self) -> Fraction:
        return _raw_to_fraction(self._a)

    @property
    def hi_fraction(self) -> Fraction:
        return _raw_to_fraction(self._b)

    @property
    def width(self) -> mpmath.mpf:
        """Upper bound on ``hi - lo``."""
        return mpmath.mp.make_mpf(mpf_sub(self._b, self._a, 53, round_ceiling))

    @property
    def mid(self) -> Fraction:
        """Exact midpoint."""
        return (self.lo_fraction + self.hi_fraction) / 2

    def __float__(self) -> float:
        return float(self.mid)

    # -- predicates -------------------------------------------------------
    def contains(self, x: Number | "Interval") -> bool:
        """True when ``x`` (a scalar or a whole interval) lies inside."""
        if isinstance(x, Interval):
            return mpf_cmp(self._a, x._a) <= 0 and mpf_cmp(x._b, self._b) <= 0
        if isinstance(x, (int, Fraction, str)):
            f = Fraction(x) if not isinstance(x, str) else Fraction(x.strip())
            return self.lo_fraction <= f <= self.hi_fraction
        a, b = _scalar_bounds(x, _prec())
        return mpf_cmp(self._a, a) <= 0 and mpf_cmp(b, self._b) <= 0

    __contains__ = contains

    def overlaps(self, other: "Interval") -> bool:
        other = as_interval(other)
        return mpf_cmp(self._a, other._b) <= 0 and mpf_cmp(other._a, self._b) <= 0

    def sign(self) -> int | None:
        """+1 / -1 when certain, 0 for the exact point zero, None if indeterminate."""
        sa, sb = mpf_sign(self._a), mpf_sign(self._b)
        if sa > 0:
            return 1
        if sb < 0:
            return -1
        if sa == 0 and sb == 0:
            return 0
        return None

    def is_positive(self) -> bool:
        return mpf_sign(self._a) > 0

    def is_negative(self) -> bool:
        return mpf_sign(self._b) < 0

    def certainly_lt(self, other) -> bool:
        other = as_interval(other)
        return mpf_cmp(self._b, other._a) < 0

    def certainly_le(self, other) -> bool:
        other = as_interval(other)
        return mpf_cmp(self._b, other._a) <= 0

    def certainly_gt(self, other) -> bool:
        return as_interval(other).certainly_lt(self)

    def certainly_ge(self, other) -> bool:
        return as_interval(other).certainly_le(self)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = as_interval(other)
        return Interval._raw(*libmpi.mpi_add((self._a, self._b), (other._a, other._b), _prec()))

    __radd__ = __add__

    def __sub__(self, other):
        other = as_interval(other)
        return Interval._raw(*libmpi.mpi_sub((self._a, self._b), (other._a, other._b), _prec()))

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        other = as_interval(other)
        return Interval._raw(*libmpi.mpi_mul((self._a, self._b), (other._a, other._b), _prec()))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_interval(other)
        if other.sign() is None or other.sign() == 0:
            raise DomainError("division by an interval containing zero")
        return Interval._raw(*libmpi.mpi_div((self._a, self._b), (other._a, other._b), _prec()))

    def __rtruediv__(self, other):
        return as_interval(other) / self

    def __neg__(self):
        return Interval._raw(*libmpi.mpi_neg((self._a, self._b)))

    def __pos__(self):
        return self

    def __abs__(self):
        return Interval._raw(*libmpi.mpi_abs((self._a, self._b)))

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported; use exp/log")
        return self.pow_int(n)

    def recip(self) -> "Interval":
        return ONE / self

    def square(self) -> "Interval":
        return abs(self) * abs(self)

    def pow_int(self, n: int) -> "Interval":
        if n < 0:
            return self.pow_int(-n).recip()
        if n == 0:
            return Interval._raw(fone, fone)
        base = abs(self) if n % 2 == 0 else self
        result = None
        while True:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if not n:
                return result
            base = base * base

    def sqrt(self) -> "Interval":
        if mpf_sign(self._a) < 0:
            raise DomainError("sqrt of an interval reaching below zero")
        return Interval._raw(*libmpi.mpi_sqrt((self._a, self._b), _prec()))

    def log(self) -> "Interval":
        if mpf_sign(self._a) <= 0:
            raise DomainError("log of an interval not strictly positive")
        prec = _prec()
        a = fzero if self._a == fone else _down_one_ulp(mpf_log(self._a, prec, round_floor), prec)
        b = fzero if self._b == fone else _up_one_ulp(mpf_log(self._b, prec, round_ceiling), prec)
        return Interval._raw(a, b)

    def exp(self) -> "Interval":
        prec = _prec()
        a = fone if self._a == fzero else _down_one_ulp(mpf_exp(self._a, prec, round_floor), prec)
        b = fone if self._b == fzero else _up_one_ulp(mpf_exp(self._b, prec, round_ceiling), prec)
        if mpf_sign(a) <= 0:
            a = fzero
        return Interval._raw(a, b)

    # -- misc ---------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self._a == other._a and self._b == other._b

    def __hash__(self) -> int:
        return hash((self._a, self._b))

    def __repr__(self) -> str:
        return f"Interval({format_lo(self, 20)}, {format_hi(self, 20)})"


def as_interval(value) -> Interval:
    """Coerce numbers, intervals and shift-like objects to an :class:`Interval`."""
    if isinstance(value, Interval):
        return value
    if hasattr(value, "interval") and callable(value.interval):
        return value.interval()
    return Interval(value)


ONE = Interval._raw(fone, fone)
ZERO = Interval._raw(fzero, fzero)


def pi_interval() -> Interval:
    prec = _prec()
    return Interval._raw(
        _down_one_ulp(mpf_pi(prec, round_floor), prec), _up_one_ulp(mpf_pi(prec, round_ceiling), prec)
    )


def interval_arith(a, b=None, op: str = "add") -> Interval:
    """Apply one named operation: add, sub, mul, div, log, exp, sqrt, pow_int, recip.

    For ``pow_int`` the second argument is the integer exponent.  Unary ops
    ignore ``b``.
    """
    a = as_interval(a)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "pow_int":
        return a.pow_int(int(b))
    if op in ("log", "exp", "sqrt", "recip"):
        return getattr(a, op)()
    raise ValueError(f"unknown interval operation {op!r}")


def certified_floor(x: Interval) -> int:
    """Floor of the enclosed real, or IntegerBoundary if the enclosure straddles an integer."""
    lo, hi = x.lo_fraction, x.hi_fraction
    f_lo, f_hi = math.floor(lo), math.floor(hi)
    if f_lo != f_hi:
        raise IntegerBoundary(f"enclosure [{float(lo)}, {float(hi)}] straddles the integer {f_hi}")
    return f_lo


def certified_ceil(x: Interval) -> int:
    lo, hi = x.lo_fraction, x.hi_fraction
    c_lo, c_hi = math.ceil(lo), math.ceil(hi)
    if c_lo != c_hi:
        raise IntegerBoundary(f"enclosure [{float(lo)}, {float(hi)}] straddles the integer {c_lo}")
    return c_lo


def escalating(func, *args, **kwargs):
    """Call ``func`` at working precision, doubling digits on IntegerBoundary.

    Other precision-dependent indeterminacy should raise IntegerBoundary too;
    the final failure at ``max_refine_digits`` is re-raised.
    """
    cfg = get_config()
    digits = cfg.working_digits
    while True:
        try:
            with precision(digits):
                return func(*args, **kwargs)
        except IntegerBoundary:
            if digits >= cfg.max_refine_digits:
                raise
            digits = min(2 * digits, cfg.max_refine_digits)


# --------------------------------------------------------------------------
# Decimal output
# --------------------------------------------------------------------------

def _directed_decimal(value: Fraction, sig: int, up: bool) -> str:
    if value == 0:
        return "0"
    neg = value < 0
    mag = -value if neg else value
    e = len(str(mag.numerator)) - len(str(mag.denominator))
    if Fraction(10) ** e > mag:
        e -= 1
    if Fraction(10) ** (e + 1) <= mag:
        e += 1
    shift = sig - 1 - e
    scaled = mag * Fraction(10) ** shift
    # rounding direction applies to the signed value
    round_mag_up = up != neg
    m = -((-scaled.numerator) // scaled.denominator) if round_mag_up else scaled.numerator // scaled.denominator
    if m == 10**sig:
        m //= 10
        shift -= 1
        e += 1
    digits = str(m)
    if -7 <= e <= 20:
        if shift <= 0:
            text = digits + "0" * (-shift)
        else:
            digits = digits.rjust(shift + 1, "0")
            text = digits[:-shift] + "." + digits[-shift:]
    else:
        text = digits[0] + ("." + digits[1:] if len(digits) > 1 else "") + f"e{e:+d}"
    return ("-" if neg else "") + text


def format_lo(x: Interval, sig: int = 20) -> str:
    """Lower endpoint as a decimal string rounded toward minus infinity."""
    return _directed_decimal(x.lo_fraction, sig, up=False)


def format_hi(x: Interval, sig: int = 20) -> str:
    """Upper endpoint as a decimal string rounded toward plus infinity."""
    return _directed_decimal(x.hi_fraction, sig, up=True)


# --------------------------------------------------------------------------
# Bernoulli numbers
# --------------------------------------------------------------------------

class BernoulliTable:
    """Exact Bernoulli numbers from ``sum_{j<=m} C(m+1, j) B_j = 0``.

    The table grows on demand; all entries are immutable Fractions.
    """

    def __init__(self) -> None:
        self._values: list[Fraction] = [Fraction(1)]
        self._lock = threading.Lock()

    def _extend(self, m: int) -> None:
        with self._lock:
            vals = self._values
            for n in range(len(vals), m + 1):
                if n > 1 and n % 2 == 1:
                    vals.append(Fraction(0))
                    continue
                acc = Fraction(0)
                for j in range(n):
                    if j > 1 and j % 2 == 1:
                        continue
                    acc += comb(n + 1, j) * vals[j]
                vals.append(-acc / (n + 1))

    def __getitem__(self, index: int) -> Fraction:
        if index < 0:
            raise DomainError("Bernoulli index must be non-negative")
        if index > 1 and index % 2 == 1:
            return Fraction(0)
        if index >= len(self._values):
            self._extend(index)
        return self._values[index]

    @property
    def values(self) -> dict[int, Fraction]:
        return {i: v for i, v in enumerate(self._values) if i % 2 == 0 and i > 0}


BERNOULLI = BernoulliTable()


def bernoulli_even(k: int) -> Fraction:
    """Exact ``B_{2k}`` for ``k >= 1``."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return BERNOULLI[2 * k]


def shifted_bernoulli_term(k: int, x) -> Interval | Fraction:
    """``(1 - 2^(1-2k)) B_{2k} / (2k x^(2k))``, exact for rational ``x``."""
    coeff = (1 - Fraction(1, 2 ** (2 * k - 1))) * bernoulli_even(k) / (2 * k)
    if isinstance(x, (int, Fraction)):
        return coeff / Fraction(x) ** (2 * k)
    return as_interval(x).pow_int(2 * k).recip() * coeff


# --------------------------------------------------------------------------
# Euler's constant
# --------------------------------------------------------------------------

def _exact_harmonic(n: int) -> Fraction:
    num, den = 0, 1
    for k in range(1, n + 1):
        num, den = num * k + den, den * k
    return Fraction(num, den)


@lru_cache(maxsize=None)
def _gamma_enclosure(digits: int) -> Interval:
    target = Fraction(1, 10 ** (digits + 2))
    n_base = max(10, digits)
    while True:
        x = Fraction(2 * n_base + 1, 2)
        partial = Fraction(0)
        k = 1
        found = None
        prev = None
        while k < 4 * digits + 40:
            term = shifted_bernoulli_term(k, x)
            nxt = shifted_bernoulli_term(k + 1, x)
            partial += term
            if prev is not None and abs(nxt) > abs(prev):
                break
            if k % 2 == 1 and abs(nxt) <= target:
                found = (partial, partial + nxt)
                break
            prev = term
            k += 1
        if found is not None:
            break
        n_base *= 2
    upper_sum, lower_sum = found
    with precision(digits + 10):
        h = Interval(_exact_harmonic(n_base))
        log_x = Interval(x).log()
        lo = h - log_x - upper_sum
        hi = h - log_x - lower_sum
        return Interval.hull(lo, hi)


def euler_gamma(digits: int | None = None) -> Interval:
    """Certified enclosure of Euler's constant of width at most ``10**(1-digits)``.

    ``H_N`` is taken exactly and ``H_N - gamma - log(N + 1/2)`` is bracketed by
    two consecutive partial sums of the half-shifted Bernoulli series, which
    envelope the true value for every odd truncation order.
    """
    cfg = get_config()
    if digits is None:
        digits = min(cfg.working_digits + 5, cfg.max_refine_digits)
    if digits < 1:
        raise DomainError("digits must be positive")
    if digits > cfg.max_refine_digits:
        raise PrecisionExceeded(f"{digits} digits requested, max_refine_digits={cfg.max_refine_digits}")
    return _gamma_enclosure(digits)


def gamma() -> Interval:
    """Euler's constant at the current working precision (plus guard digits)."""
    return _gamma_enclosure(get_config().working_digits + 5)


def exp_gamma() -> Interval:
    """Enclosure of ``e^gamma`` at working precision."""
    return gamma().exp()
