"""Discrete approximations of the shifted logarithmic integral by harmonic sums.

For a shift ``t`` and a starting index ``N`` with ``t > -log N`` the central
objects are

* ``theta_n = int_N^n dx/(t + log x) - sum_{N <= k < n} 1/(H_k - gamma + t)``,
* ``beta_n(t, r) = li(e^t n)/e^t - sum_{ceil(r) <= k < n} 1/(H_k - gamma + t)``,

together with certified two-sided bounds on their limits.  All sums are kept
as prefix arrays inside a :class:`ShiftContext` so repeated queries are cheap.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, IntegerBoundary, NoInteriorMax, PrecisionExceeded
from .numeric_core import (
    ONE,
    ZERO,
    Interval,
    as_interval,
    certified_ceil,
    gamma,
    get_config,
    precision,
    _prec,
)
from .shifts import Shift, as_shift, shift_interval, shift_minus_gamma
from .special_functions import (
    _bisect_root,
    harmonic_enclosures,
    harmonic_run,
    li,
    li_scaled,
    mu,
    tail_integral,
)


def _exp_shift(t) -> Interval:
    return t.exp()


class ShiftContext:
    """Prefix sums of ``1/(H_k - gamma + t)^j`` for ``k >= N``.

    Caches are keyed by binary precision and only ever appended to; a lock
    serialises writers while readers use whatever prefix already exists.
    """

    def __init__(self, t, N: int):
        if N < 1:
            raise DomainError("N must be a positive integer")
        self.t = as_shift(t)
        self.N = int(N)
        first = harmonic_run(self.N, self.N + 1)[0] + shift_minus_gamma(self.t)
        if not first.is_positive():
            raise DomainError(f"need H_N - gamma + t > 0 (t={self.t}, N={self.N})")
        self._lock = threading.Lock()
        self._recips: dict[int, list[Interval]] = {}
        self._prefix: dict[tuple[int, int], list[Interval]] = {}
        self._midlog: dict[int, list[Interval]] = {}
        self._scalars: dict[tuple[int, str], Interval] = {}

    def __repr__(self) -> str:
        return f"ShiftContext(t={self.t}, N={self.N})"

    @property
    def gamma(self) -> Interval:
        return gamma()

    def _scalar(self, name: str, func) -> Interval:
        key = (_prec(), name)
        value = self._scalars.get(key)
        if value is None:
            value = func()
            self._scalars[key] = value
        return value

    def require_log_domain(self) -> None:
        """Integrals from ``N`` need ``t > -log N``, which is stronger than positivity of the sums."""
        if not (self.t_interval() + Interval(self.N).log()).is_positive():
            raise DomainError(f"need t > -log N (t={self.t}, N={self.N})")

    def t_interval(self) -> Interval:
        return shift_interval(self.t)

    def offset(self) -> Interval:
        """Enclosure of ``t - gamma``."""
        return self._scalar("offset", lambda: shift_minus_gamma(self.t))

    def exp_t(self) -> Interval:
        return self._scalar("exp", lambda: _exp_shift(self.t))

    def _reciprocals(self, m: int) -> list[Interval]:
        """``1/(H_k - gamma + t)`` for ``k = N .. N + len - 1``, at least ``m`` entries."""
        prec = _prec()
        recips = self._recips.get(prec)
        if recips is not None and len(recips) >= m:
            return recips
        with self._lock:
            recips = self._recips.setdefault(prec, [])
            if len(recips) < m:
                a = self.N + len(recips)
                harm = harmonic_run(a, self.N + m)
                c = self.offset()
                for k, h in enumerate(harm, start=a):
                    d = h + c
                    if not d.is_positive():
                        raise DomainError(f"H_{k} - gamma + t is not certified positive")
                    recips.append(d.recip())
            return recips

    def prefix(self, order: int, count: int) -> list[Interval]:
        """Prefix list ``P`` with ``P[i] = sum_{k=N}^{N+i-1} 1/(H_k-gamma+t)^order``."""
        if order < 1:
            raise DomainError("order must be >= 1")
        key = (_prec(), order)
        pre = self._prefix.get(key)
        if pre is not None and len(pre) > count:
            return pre
        recips = self._reciprocals(count)
        with self._lock:
            pre = self._prefix.setdefault(key, [ZERO])
            acc = pre[-1]
            for i in range(len(pre) - 1, count):
                r = recips[i]
                acc = acc + (r if order == 1 else r.pow_int(order))
                pre.append(acc)
            return pre

    def midlog_prefix(self, count: int) -> list[Interval]:
        """Prefix list of ``sum_{k=N}^{N+i-1} 1/(t + log(k + 1/2))``."""
        prec = _prec()
        pre = self._midlog.get(prec)
        if pre is not None and len(pre) > count:
            return pre
        with self._lock:
            pre = self._midlog.setdefault(prec, [ZERO])
            acc = pre[-1]
            T = self.t_interval()
            for i in range(len(pre) - 1, count):
                k = self.N + i
                acc = acc + (T + Interval(Fraction(2 * k + 1, 2)).log()).recip()
                pre.append(acc)
            return pre


@lru_cache(maxsize=128)
def _cached_context(t, N: int) -> ShiftContext:
    return ShiftContext(t, N)


def shift_context(t, N: int) -> ShiftContext:
    """Shared :class:`ShiftContext` for ``(t, N)`` so prefix caches are reused."""
    return _cached_context(as_shift(t), int(N))


@dataclass(frozen=True)
class BoundPair:
    lower: Interval
    upper: Interval
    n_used: int
    target: str

    @property
    def claim(self) -> Interval:
        """The certified statement ``target in [lower.lo, upper.hi]``."""
        return Interval.hull(self.lower, self.upper)


@dataclass(frozen=True)
class RCeiling:
    t: object
    r_t: Interval
    R_t: int


def _is_logmu(t) -> bool:
    return isinstance(t, Shift) and t.is_logmu


def r_ceiling(t) -> RCeiling:
    """``R_t = ceil(mu e^-t)``, refining precision until the ceiling is certain."""
    t = as_shift(t)
    if _is_logmu(t):
        return RCeiling(t, ONE, 1)
    cfg = get_config()
    digits = cfg.working_digits
    while True:
        with precision(digits):
            r_t = mu() / _exp_shift(t)
            try:
                return RCeiling(t, r_t, certified_ceil(r_t))
            except IntegerBoundary:
                if digits >= cfg.max_refine_digits:
                    raise
        digits = min(2 * digits, cfg.max_refine_digits)


def _li_scaled_int(t, n: int) -> Interval:
    if _is_logmu(t) and n == 1:
        return ZERO
    return li_scaled(t, n)


def partial_inverse_sum(ctx: ShiftContext, n: int, order: int = 1) -> Interval:
    """``sum_{k=N}^{n-1} 1/(H_k - gamma + t)^order`` (exact 0 when ``n == N``)."""
    if n < ctx.N:
        raise DomainError("n must be >= N")
    if n == ctx.N:
        return ZERO
    return ctx.prefix(order, n - ctx.N)[n - ctx.N]


def _log_integral(ctx: ShiftContext, a: int, b: int) -> Interval:
    """``int_a^b dx/(t + log x)`` as a difference of scaled logarithmic integrals."""
    if a == b:
        return ZERO
    ctx.require_log_domain()
    return _li_scaled_int(ctx.t, b) - _li_scaled_int(ctx.t, a)


def discrepancies(ctx: ShiftContext, n: int) -> tuple[Interval, Interval, Interval]:
    """``(theta_n, eta_n, delta_n)`` for the context's ``(t, N)``.

    ``eta_n = sum_{k=N}^{n} [1/(t + log(k+1/2)) - 1/(H_k - gamma + t)]`` and
    ``delta_n = int_N^{n+1} dx/(t + log x) - sum_{k=N}^{n} 1/(t + log(k+1/2))``,
    so that ``theta_n = eta_{n-1} + delta_{n-1}``.
    """
    if n < ctx.N:
        raise DomainError("n must be >= N")
    count = n - ctx.N
    s1 = ctx.prefix(1, count + 1)
    mids = ctx.midlog_prefix(count + 1)
    theta = _log_integral(ctx, ctx.N, n) - s1[count]
    eta = mids[count + 1] - s1[count + 1]
    delta = _log_integral(ctx, ctx.N, n + 1) - mids[count + 1]
    return theta, eta, delta


def theta_tail_bounds(ctx: ShiftContext, n: int) -> BoundPair:
    """Two-sided bounds on ``theta(t, N) - theta_n(t, N)``."""
    if n < ctx.N:
        raise DomainError("n must be >= N")
    ctx.require_log_domain()
    t = ctx.t
    T = ctx.t_interval()
    n1 = Interval(n + 1)
    nh = Interval(Fraction(2 * n + 1, 2))
    nn = Interval(n)
    s1 = T + n1.log()
    sh = T + nh.log()
    s0 = T + nn.log()
    lower = tail_integral(n + 1, t) / 24 + (n1 * s1.square() * 24).recip()
    upper = (
        tail_integral(n, t) / 24
        + (nh * sh.square() * 24).recip()
        + (nn.square() * s0.square() * 24).recip()
        + (nn.square() * s0.pow_int(3) * 12).recip()
    )
    return BoundPair(lower, upper, n, "theta(t,N)")


def _start_index(t, r) -> int:
    if isinstance(r, Interval):
        R = certified_ceil(r)
    else:
        R = math.ceil(Fraction(r) if not isinstance(r, float) else Fraction(repr(r)))
    if R < r_ceiling(t).R_t:
        raise DomainError(f"ceil(r)={R} is below mu e^-t")
    return R


def beta_n(t, r, n: int) -> Interval:
    """``li(e^t n)/e^t - sum_{ceil(r) <= k < n} 1/(H_k - gamma + t)``."""
    t = as_shift(t)
    R = _start_index(t, r)
    if n < R:
        raise DomainError("n must be >= ceil(r)")
    ctx = shift_context(t, R)
    return _li_scaled_int(t, n) - partial_inverse_sum(ctx, n)


def beta_bounds(t, n: int) -> BoundPair:
    """Certified bracket for ``beta(t)`` from the truncation ``beta_n(t)``."""
    t = as_shift(t)
    R = r_ceiling(t).R_t
    if n < R:
        raise DomainError(f"n={n} is below R_t={R}")
    ctx = shift_context(t, R)
    base = _li_scaled_int(t, n) - partial_inverse_sum(ctx, n)
    tail = theta_tail_bounds(ctx, n)
    return BoundPair(base + tail.lower, base + tail.upper, n, "beta(t)")


def beta_range_ceiling_check(t) -> tuple[Interval, Interval, Interval]:
    """``(li(e^t R_t)/e^t, li(mu + e^t)/e^t, 1/log mu)``, each an enclosure."""
    t = as_shift(t)
    R = r_ceiling(t).R_t
    first = _li_scaled_int(t, R)
    E = _exp_shift(t)
    second = li(mu() + E).value / E
    third = mu().log().recip()
    return first, second, third


def beta_n_derivative(t, n: int, N: int = 1) -> Interval:
    """``d/dt beta_n(t)`` with the sum started at ``N``."""
    ctx = ShiftContext(t, N)
    T = ctx.t_interval()
    d_li = Interval(n) / (T + Interval(n).log()) - _li_scaled_int(ctx.t, n)
    return d_li + partial_inverse_sum(ctx, n, 2)


def rho_n_search(n: int, bracket=None, width=Fraction(1, 10**6)) -> Interval:
    """Enclosure of the interior maximiser of ``beta_n`` on ``[log mu, 2]``.

    Bisection on the certified sign of the closed-form derivative; the
    precision doubles whenever a sign cannot be decided.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if bracket is None:
        a, b = mu().log().hi_fraction, Fraction(2)
    else:
        a, b = (Fraction(x) if not isinstance(x, float) else Fraction(repr(x)) for x in bracket)
    width = Fraction(width) if not isinstance(width, float) else Fraction(repr(width))
    cfg = get_config()

    def sign_at(x: Fraction) -> int:
        digits = cfg.working_digits
        while True:
            with precision(digits):
                s = beta_n_derivative(Interval(x), n).sign()
            if s is not None:
                return s
            if digits >= cfg.max_refine_digits:
                raise PrecisionExceeded(f"derivative sign undecidable at t={float(x)}")
            digits = min(2 * digits, cfg.max_refine_digits)

    if sign_at(a) <= 0 or sign_at(b) >= 0:
        raise NoInteriorMax(f"beta_{n} has no certified interior maximum on [{float(a)}, {float(b)}]")
    while b - a > width:
        m = (a + b) / 2
        s = sign_at(m)
        if s == 0:
            return Interval(m)
        if s > 0:
            a = m
        else:
            b = m
    return Interval(a, b)


@lru_cache(maxsize=None)
def _alpha_enclosure(digits: int, limit: int) -> Interval:
    def f(x):
        X = Interval(x)
        return li(X).value - X / X.log()

    return _bisect_root(f, Fraction(35, 10), Fraction(4), Fraction(1, 10 ** (digits + 2)), digits + 10, limit)


def alpha_star(digits: int | None = None) -> Interval:
    """Unique solution of ``li(x) = x / log x``, width ``<= 10**(1-digits)``."""
    cfg = get_config()
    if digits is None:
        digits = min(cfg.working_digits + 5, cfg.max_refine_digits)
    if digits > cfg.max_refine_digits:
        raise PrecisionExceeded(f"{digits} digits requested, max_refine_digits={cfg.max_refine_digits}")
    return _alpha_enclosure(digits, max(cfg.max_refine_digits, 2 * digits + 20))


def harmonic_mean_shifted(t, n: int) -> Interval:
    """Harmonic mean of ``H_1 + t, ..., H_n + t``."""
    if n < 1:
        raise DomainError("n must be positive")
    T = shift_interval(t)
    if not (T + 1).is_positive():
        raise DomainError("need H_1 + t > 0")
    harm = harmonic_enclosures(n)
    total = ZERO
    for k in range(1, n + 1):
        total = total + (harm[k] + T).recip()
    return Interval(n) / total


def log_integral_power(ctx: ShiftContext, a: int, b: int, power: int) -> Interval:
    """``int_a^b dx/(t + log x)^power`` via integration by parts."""
    if power < 1:
        raise DomainError("power must be >= 1")
    ctx.require_log_domain()
    T = ctx.t_interval()
    value = _log_integral(ctx, a, b)
    A, B = Interval(a), Interval(b)
    sa, sb = T + A.log(), T + B.log()
    for m in range(1, power):
        boundary = B / sb.pow_int(m) - A / sa.pow_int(m)
        value = (value - boundary) / m
    return value


def theta_derivative(ctx: ShiftContext, n: int, order: int) -> Interval:
    """``(-1)^j d^j/dt^j theta_n(t, N)`` for ``j = order >= 0``.

    Equal to ``j! (int_N^n dx/(t+log x)^(j+1) - sum_{N<=k<n} 1/(H_k-gamma+t)^(j+1))``.
    """
    if order < 0:
        raise DomainError("order must be >= 0")
    if n < ctx.N:
        raise DomainError("n must be >= N")
    integral = log_integral_power(ctx, ctx.N, n, order + 1)
    return (integral - partial_inverse_sum(ctx, n, order + 1)) * math.factorial(order)
