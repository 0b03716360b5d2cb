"""Certified harmonic numbers, the logarithmic integral and related closed forms."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from mpmath.libmp import from_rational, round_ceiling, round_floor

from .errors import DomainError, PrecisionExceeded
from .numeric_core import (
    ONE,
    ZERO,
    Interval,
    as_interval,
    gamma,
    get_config,
    precision,
    shifted_bernoulli_term,
    _prec,
)

EXACT_HARMONIC_LIMIT = 10_000
LN2 = math.log(2)


# --------------------------------------------------------------------------
# Harmonic numbers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicValue:
    argument: int | Fraction | float
    value: Interval
    exact: Fraction | None = None


class _HarmonicTable:
    """Enclosures of H_0..H_n at a given binary precision, grown on demand.

    Up to ``EXACT_HARMONIC_LIMIT`` every entry is the outward rounding of the
    exact rational ``H_k`` (numerator over lcm(1..k)); later entries are
    accumulated with interval additions.
    """

    def __init__(self) -> None:
        self._tables: dict[int, list[Interval]] = {}
        self._state: dict[int, tuple[int, int]] = {}
        self._lock = threading.Lock()

    def get(self, n: int) -> list[Interval]:
        prec = _prec()
        table = self._tables.get(prec)
        if table is not None and len(table) > n:
            return table
        with self._lock:
            table = self._tables.setdefault(prec, [ZERO])
            num, den = self._state.get(prec, (0, 1))
            k = len(table)
            while k <= n:
                if k <= EXACT_HARMONIC_LIMIT:
                    g = math.gcd(den, k)
                    scale = k // g
                    den_new = den * scale
                    num = num * scale + den_new // k
                    den = den_new
                    table.append(
                        Interval._raw(
                            from_rational(num, den, prec, round_floor),
                            from_rational(num, den, prec, round_ceiling),
                        )
                    )
                else:
                    table.append(table[-1] + Interval(Fraction(1, k)))
                k += 1
            self._state[prec] = (num, den)
            return table


_HARMONIC = _HarmonicTable()


def harmonic_enclosures(n: int) -> list[Interval]:
    """List whose k-th entry encloses ``H_k`` for all ``k <= n`` (may be longer)."""
    return _HARMONIC.get(n)


DENSE_HARMONIC_LIMIT = 200_000


def harmonic_run(a: int, b: int) -> list[Interval]:
    """Enclosures of ``H_a, ..., H_{b-1}``.

    Short prefixes come from the shared table; runs starting far out begin
    from an asymptotic enclosure of ``H_a`` and add ``1/k`` term by term.
    """
    if b <= a:
        return []
    if b - 1 <= DENSE_HARMONIC_LIMIT:
        return harmonic_enclosures(b - 1)[a:b]
    h = harmonic_real(a)
    out = [h]
    for k in range(a + 1, b):
        h = h + Interval(Fraction(1, k))
        out.append(h)
    return out


def _exact_harmonic(n: int) -> Fraction:
    num, den = 0, 1
    for k in range(1, n + 1):
        g = math.gcd(den, k)
        scale = k // g
        den_new = den * scale
        num = num * scale + den_new // k
        den = den_new
    return Fraction(num, den)


def harmonic_int(n: int) -> HarmonicValue:
    """``H_n = 1 + 1/2 + ... + 1/n``; exact rational for ``n <= 10**4``."""
    if n < 0:
        raise DomainError("harmonic_int needs n >= 0")
    exact = _exact_harmonic(n) if n <= EXACT_HARMONIC_LIMIT else None
    value = Interval(exact) if exact is not None else harmonic_run(n, n + 1)[0]
    return HarmonicValue(n, value, exact)


def _bernoulli_envelope(z: Interval) -> Interval:
    """Enclosure of ``H_{z-1/2} - gamma - log z`` for large positive ``z``.

    Consecutive partial sums of the half-shifted Bernoulli series bracket the
    value for every odd truncation order; we stop at the first odd order whose
    next term is negligible at working precision.
    """
    tol = Fraction(1, 2 ** (_prec() + 5))
    total = ZERO
    k = 1
    while True:
        term = shifted_bernoulli_term(k, z)
        total = total + term
        nxt = shifted_bernoulli_term(k + 1, z)
        if k % 2 == 1 and abs(nxt).hi_fraction < tol:
            return Interval.hull(total, total + nxt)
        k += 1
        if k > 400:
            raise PrecisionExceeded("Bernoulli envelope did not converge; shift further")


def harmonic_real(x) -> Interval:
    """Enclosure of ``H_x = Psi(x + 1) + gamma`` for real ``x > -1``.

    The argument is moved to ``y = x + n`` with ``y`` large, where the
    half-shifted Bernoulli envelope pins ``H_y - gamma - log(y + 1/2)`` to
    working precision; the recurrence ``H_x = H_y - sum_{k=1..n} 1/(x+k)``
    brings it back.  With a first-order envelope this is exactly the
    two-sided estimate ``1/(24(x+n+1)^2) <= ... <= 1/(24(x+n+1/2)^2)``.
    """
    if isinstance(x, int) and not isinstance(x, bool) and 0 <= x <= EXACT_HARMONIC_LIMIT:
        return harmonic_int(x).value
    X = as_interval(x)
    if not X.certainly_gt(-1):
        raise DomainError("harmonic_real is restricted to x > -1")
    target = get_config().working_digits + 10
    n = max(0, math.ceil(target - X.lo_fraction))
    y_half = X + n + Fraction(1, 2)
    value = gamma() + y_half.log() + _bernoulli_envelope(y_half)
    if n:
        recips = ZERO
        for k in range(1, n + 1):
            recips = recips + (X + k).recip()
        value = value - recips
    return value


# --------------------------------------------------------------------------
# Exponential and logarithmic integrals
# --------------------------------------------------------------------------

def _digits_for_bits(bits: int) -> int:
    return math.ceil(bits / math.log2(10))


def ei(z) -> Interval:
    """Exponential integral ``Ei(z) = gamma + log|z| + sum z^k/(k k!)`` for real ``z != 0``.

    The tail after term K is bounded by twice the first omitted term once
    ``K + 1 >= 2|z|`` (successive term ratios are then at most 1/2).
    """
    z = as_interval(z)
    if z.sign() in (None, 0):
        raise DomainError("Ei is singular at 0")
    zmag = max(abs(float(z.lo)), abs(float(z.hi))) * (1 + 1e-12)
    negative = z.is_negative()
    out_bits = _prec()
    extra = 24 + int(math.log2(zmag + 2)) + (int(2 * zmag / LN2) if negative else 0)
    cfg = get_config()
    with precision(cfg.working_digits + _digits_for_bits(extra)):
        if negative:
            scale_exp = -zmag / LN2 - math.log2(zmag + 1)
            tol = Fraction(1, 2 ** (out_bits + 12 + max(0, int(-scale_exp))))
        else:
            tol = Fraction(1, 2 ** (out_bits + 12))
        s = ZERO
        power = ONE
        k = 0
        while True:
            k += 1
            power = power * z / k
            s = s + power / k
            if k + 1 >= 2 * zmag:
                nxt = abs(power * z / (k + 1) / (k + 1)).hi_fraction
                if nxt < tol:
                    break
        remainder = Interval(-2 * nxt, 2 * nxt)
        return gamma() + abs(z).log() + s + remainder


@dataclass(frozen=True)
class LiValue:
    argument: object
    value: Interval


def li(x) -> LiValue:
    """Logarithmic integral (principal value) via ``li(x) = Ei(log x)``."""
    X = as_interval(x)
    if not X.is_positive():
        raise DomainError("li needs x > 0")
    if X.contains(1):
        raise DomainError("li is singular at x = 1")
    return LiValue(x, ei(X.log()))


def _shift_parts(t) -> tuple[Interval, Interval]:
    """Return (t, e^t) enclosures; symbolic shifts supply an exact e^t where possible."""
    if isinstance(t, Interval):
        return t, t.exp()
    if hasattr(t, "interval"):
        return t.interval(), t.exp()
    T = Interval(t)
    return T, T.exp()


def li_scaled(t, x) -> Interval:
    """``li(e^t x) / e^t`` evaluated as ``Ei(t + log x) e^-t``."""
    T, E = _shift_parts(t)
    X = as_interval(x)
    if not X.is_positive():
        raise DomainError("li_scaled needs x > 0")
    z = T + X.log()
    if z.sign() in (None, 0):
        raise DomainError("li_scaled argument e^t x equals 1")
    if abs(z).hi_fraction > 10**6:
        raise DomainError("|t + log x| too large")
    return ei(z) / E


def _bisect_root(func, a: Fraction, b: Fraction, width: Fraction, digits: int, limit: int) -> Interval:
    """Certified bisection for an increasing sign change of ``func`` on [a, b]."""
    while b - a > width:
        m = (a + b) / 2
        wd = digits
        while True:
            with precision(wd, max(limit, wd)):
                s = func(m).sign()
            if s is not None:
                break
            if wd >= limit:
                raise PrecisionExceeded(f"sign undecidable at {float(m)} with {wd} digits")
            wd = min(2 * wd, limit)
        if s == 0:
            return Interval(m)
        if s > 0:
            b = m
        else:
            a = m
    return Interval(a, b)


@lru_cache(maxsize=None)
def _mu_enclosure(digits: int, limit: int) -> Interval:
    return _bisect_root(
        lambda m: li(m).value,
        Fraction(14, 10),
        Fraction(15, 10),
        Fraction(1, 10 ** (digits + 2)),
        digits + 10,
        limit,
    )


def soldner_mu(digits: int | None = None) -> Interval:
    """Ramanujan-Soldner constant (the positive zero of li) to width ``<= 10**(1-digits)``."""
    cfg = get_config()
    if digits is None:
        digits = min(cfg.working_digits + 5, cfg.max_refine_digits)
    if digits > cfg.max_refine_digits:
        raise PrecisionExceeded(f"{digits} digits requested, max_refine_digits={cfg.max_refine_digits}")
    return _mu_enclosure(digits, max(cfg.max_refine_digits, 2 * digits + 20))


def mu() -> Interval:
    cfg = get_config()
    return _mu_enclosure(cfg.working_digits + 5, max(cfg.max_refine_digits, 2 * cfg.working_digits + 30))


def log_mu() -> Interval:
    return mu().log()


def tail_integral(r, t) -> Interval:
    """``int_r^inf dx / (x^2 (t + log x)^2) = e^t li(1/(r e^t)) + 1/(r (t + log r))``."""
    T, E = _shift_parts(t)
    R = as_interval(r)
    if not R.is_positive():
        raise DomainError("tail_integral needs r > 0")
    s = T + R.log()
    if not s.is_positive():
        raise DomainError("tail_integral needs t + log r > 0")
    extra = 5 + int(math.log10(float(s.hi) + 2))
    with precision(get_config().working_digits + extra):
        s = T + R.log()
        return E * ei(-s) + (R * s).recip()


def li_difference_bounds(x, y, t=0) -> tuple[Interval, Interval]:
    """Bracket for ``li(e^t y)/e^t - li(e^t x)/e^t`` from the concavity of ``1/log``.

    Returns ``((y-x)/(t + log((x+y)/2)), (y-x)/(t + log x))``.
    """
    T, _ = _shift_parts(t)
    X, Y = as_interval(x), as_interval(y)
    if not (X.is_positive() and Y.certainly_gt(X)):
        raise DomainError("need y > x > 0")
    base = T + X.log()
    if not base.is_positive():
        raise DomainError("need t > -log x")
    diff = Y - X
    lower = diff / (T + ((X + Y) / 2).log())
    upper = diff / base
    return lower, upper
