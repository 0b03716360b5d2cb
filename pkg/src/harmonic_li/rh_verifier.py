"""Certified evaluation of prime-counting inequalities built from harmonic sums.

Each inequality compares ``pi(e^t n)`` (or the density ``pi(e^t n)/(e^t n)``)
with ``e^t sum_{R <= k < n} 1/(H_k - gamma + t)`` and a bound of the shape
``M e^{alpha t} n^alpha L_n + lambda e^t`` where ``L_n`` is ``t + log n`` or
``H_n - gamma + t``.  Verdicts are three-valued: an enclosure of the margin
that straddles zero is reported as ``indeterminate`` and never as a failure.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .discretized_li import partial_inverse_sum, r_ceiling, shift_context
from .errors import DomainError, IntegerBoundary, PrecisionExceeded
from .numeric_core import (
    ZERO,
    Interval,
    as_interval,
    format_hi,
    format_lo,
    get_config,
    pi_interval,
    precision,
)
from .prime_counter import PrimeCounter, default_counter
from .shifts import Shift, as_shift, shift_interval, shift_minus_gamma
from .special_functions import harmonic_enclosures

HOLDS, FAILS, INDETERMINATE = "holds", "fails", "indeterminate"
VARIANTS = {"log": 3, "harmonic": 4}
CSV_COLUMNS = ("preset", "n", "lhs_lo", "lhs_hi", "rhs_lo", "rhs_hi", "verdict")


def schoenfeld_m() -> Interval:
    """``1/(8 pi)``."""
    return (pi_interval() * 8).recip()


@dataclass(frozen=True)
class InequalityPreset:
    id: str
    t: Shift
    sum_start: int
    lam: str
    n_threshold: int
    proof_range: tuple[int, int]
    known_exceptions: frozenset[int] = frozenset()
    alpha_exponent: Fraction = Fraction(1, 2)
    C: Fraction = Fraction(2657)
    variant: str = "log"

    @property
    def lambda_interval(self) -> Interval:
        return Interval(Fraction(self.lam))

    @property
    def M(self) -> Interval:
        return schoenfeld_m()


def _preset(id, t, start, lam, threshold, proof, exceptions=()):
    return InequalityPreset(id, Shift.parse(t), start, lam, threshold, proof, frozenset(exceptions))


PRESETS: dict[str, InequalityPreset] = {
    p.id: p
    for p in (
        _preset("rh5", "gamma", 1, "0.4986013304", 803, (803, 1491)),
        _preset("rh6", "gamma", 2, "1.4986013304", 1, (1, 1491)),
        _preset("rh6b", "gamma+1", 1, "0.7509547014", 1, (1, 548)),
        _preset("rh7", "0", 2, "1.0956456993", 1427, (1427, 2657)),
        _preset("rh8a", "log2", 1, "0.6026096358", 714, (714, 1328)),
        _preset("rh9", "1", 1, "0.7418976158", 1, (1, 977), (82,)),
    )
}


@dataclass(frozen=True)
class CheckResult:
    preset: str
    n: int
    lhs: Interval
    rhs: Interval
    verdict: str
    margin: Interval
    form: int = 3
    digits: int = 0
    conditional: bool = False

    def csv_row(self) -> list[str]:
        return [
            self.preset,
            str(self.n),
            format_lo(self.lhs, 20),
            format_hi(self.lhs, 20),
            format_lo(self.rhs, 20),
            format_hi(self.rhs, 20),
            self.verdict,
        ]


def _verdict(margin: Interval) -> str:
    if margin.is_positive():
        return HOLDS
    if margin.hi_fraction < 0:
        return FAILS
    return INDETERMINATE


def _power(n: int, exponent: Fraction) -> Interval:
    N = Interval(n)
    if exponent == 0:
        return Interval(1)
    if exponent == Fraction(1, 2):
        return N.sqrt()
    if exponent.denominator == 1:
        e = int(exponent)
        return N.pow_int(e) if e >= 0 else N.pow_int(-e).recip()
    return (N.log() * exponent).exp()


def _exp_scaled(t, E: Interval, exponent: Fraction) -> Interval:
    """``e^{exponent t}`` reusing an enclosure of ``e^t`` when possible."""
    if exponent == 0:
        return Interval(1)
    if exponent == 1:
        return E
    if exponent == Fraction(1, 2):
        return E.sqrt()
    if exponent == Fraction(-1, 2):
        return E.sqrt().recip()
    return (shift_interval(t) * exponent).exp()


def _evaluate_once(t, start: int, lam: Interval, M: Interval, alpha: Fraction, n: int, form: int,
                   counter: PrimeCounter, label: str) -> CheckResult:
    t = as_shift(t)
    T = shift_interval(t)
    E = t.exp()
    x = E * n
    count = counter.pi(x)
    if n > start:
        S = partial_inverse_sum(shift_context(t, start), n)
    else:
        S = ZERO
    if form in (1, 3):
        shape = T + Interval(n).log()
    else:
        shape = harmonic_enclosures(n)[n] + shift_minus_gamma(t)
    if form in (1, 2):
        lhs = abs(Interval(count) - E * S)
        rhs = M * _exp_scaled(t, E, alpha) * _power(n, alpha) * shape + lam * E
    else:
        lhs = abs(Interval(count) / x - S / n)
        rhs = M * _exp_scaled(t, E, alpha - 1) * shape / _power(n, 1 - alpha) + lam / n
    margin = rhs - lhs
    return CheckResult(label, n, lhs, rhs, _verdict(margin), margin, form, get_config().working_digits)


def _evaluate_escalating(*args) -> CheckResult:
    cfg = get_config()
    digits = cfg.working_digits
    while True:
        try:
            with precision(digits):
                result = _evaluate_once(*args)
            if result.verdict != INDETERMINATE or digits >= cfg.max_refine_digits:
                return result
        except IntegerBoundary:
            if digits >= cfg.max_refine_digits:
                raise
        digits = min(2 * digits, cfg.max_refine_digits)


def _sum_start(preset: InequalityPreset) -> int:
    R = r_ceiling(preset.t).R_t
    if preset.sum_start < R:
        raise DomainError(f"preset {preset.id}: sum start {preset.sum_start} is below R_t={R}")
    return preset.sum_start


def evaluate_inequality(preset: InequalityPreset | str, n: int, variant: str | None = None,
                        counter: PrimeCounter | None = None) -> CheckResult:
    """Certified check of one preset inequality at ``n`` (density form)."""
    if isinstance(preset, str):
        preset = PRESETS[preset.lower()]
    if n < 1:
        raise DomainError("n must be a positive integer")
    form = VARIANTS[variant or preset.variant]
    result = _evaluate_escalating(
        preset.t, _sum_start(preset), preset.lambda_interval, preset.M, preset.alpha_exponent,
        n, form, counter or default_counter(), preset.id,
    )
    lo, hi = preset.proof_range
    cond = not (lo <= n <= hi)
    if cond:
        result = replace(result, conditional=True)
    return result


def generic_bound_check(M, alpha_exponent, C, t, r, lam, n: int, form: int,
                        counter: PrimeCounter | None = None) -> CheckResult:
    """Evaluate one of the four general inequalities at ``n``.

    Forms 1 and 2 compare counts, forms 3 and 4 densities; forms 2 and 4 use
    ``H_n - gamma + t`` where 1 and 3 use ``t + log n``.
    """
    if form not in (1, 2, 3, 4):
        raise DomainError("form must be 1, 2, 3 or 4")
    t = as_shift(t)
    alpha = Fraction(alpha_exponent)
    M_iv, lam_iv, C_iv = as_interval(M), as_interval(lam), as_interval(C)
    rc = r_ceiling(t)
    R = Fraction(r) if not isinstance(r, float) else Fraction(repr(r))
    start = -(-R.numerator // R.denominator)
    if start < rc.R_t:
        raise DomainError(f"ceil(r)={start} is below mu e^-t")
    if not Interval(n).certainly_ge(C_iv / t.exp()):
        raise DomainError(f"n={n} is below C e^-t")
    return _evaluate_escalating(t, start, lam_iv, M_iv, alpha, n, form, counter or default_counter(), "custom")


@dataclass
class ScanReport:
    preset: str
    n_lo: int
    n_hi: int
    variant: str
    counts: dict[str, int]
    violations: list[int]
    indeterminate: list[int]
    results: list[CheckResult] = field(repr=False, default_factory=list)
    wall_time: float = 0.0
    conditional: bool = False
    digits: int = 0
    cache_checksum: str = ""

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        lines.extend(",".join(r.csv_row()) for r in self.results)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        rows = [dict(zip(CSV_COLUMNS, r.csv_row())) for r in self.results]
        meta = {
            "preset": self.preset,
            "range": [self.n_lo, self.n_hi],
            "variant": self.variant,
            "counts": self.counts,
            "violations": self.violations,
            "indeterminate": self.indeterminate,
            "conditional": self.conditional,
            "precision_digits": self.digits,
            "cache_checksum": self.cache_checksum,
            "wall_time_s": round(self.wall_time, 3),
        }
        return json.dumps({"metadata": meta, "results": rows}, indent=2) + "\n"


def _scan_chunk(args) -> list[CheckResult]:
    preset, lo, hi, variant, digits, max_digits = args
    with precision(digits, max_digits):
        return [evaluate_inequality(preset, n, variant) for n in range(lo, hi + 1)]


def scan(preset: InequalityPreset | str, n_lo: int | None = None, n_hi: int | None = None,
         variant: str | None = None, workers: int = 1) -> ScanReport:
    """Evaluate a preset over ``[n_lo, n_hi]`` (defaults to its proof range)."""
    if isinstance(preset, str):
        preset = PRESETS[preset.lower()]
    lo_default, hi_default = preset.proof_range
    n_lo = lo_default if n_lo is None else n_lo
    n_hi = hi_default if n_hi is None else n_hi
    if n_lo < 1 or n_hi < n_lo:
        raise DomainError("need 1 <= n_lo <= n_hi")
    variant = variant or preset.variant
    cfg = get_config()
    start = time.perf_counter()
    if workers > 1 and n_hi - n_lo > 64:
        step = -(-(n_hi - n_lo + 1) // (4 * workers))
        chunks = [(preset, a, min(a + step - 1, n_hi), variant, cfg.working_digits, cfg.max_refine_digits)
                  for a in range(n_lo, n_hi + 1, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_scan_chunk, chunks) for r in part]
    else:
        results = [evaluate_inequality(preset, n, variant) for n in range(n_lo, n_hi + 1)]
    counts = {HOLDS: 0, FAILS: 0, INDETERMINATE: 0}
    for r in results:
        counts[r.verdict] += 1
    counter = default_counter()
    return ScanReport(
        preset=preset.id,
        n_lo=n_lo,
        n_hi=n_hi,
        variant=variant,
        counts=counts,
        violations=[r.n for r in results if r.verdict == FAILS],
        indeterminate=[r.n for r in results if r.verdict == INDETERMINATE],
        results=results,
        wall_time=time.perf_counter() - start,
        conditional=any(r.conditional for r in results),
        digits=cfg.working_digits,
        cache_checksum=counter.cache.source_hash,
    )


@dataclass(frozen=True)
class ResidualRow:
    n: int
    residual: Interval
    normalized: Interval


def residual_series(t, N: int, n_lo: int, n_hi: int, stride: int = 1,
                    counter: PrimeCounter | None = None) -> list[ResidualRow]:
    """``pi(e^t n) - e^t sum_{N<=k<n} 1/(H_k-gamma+t)`` and its ratio to ``sqrt(n) H_n``."""
    if stride < 1:
        raise DomainError("stride must be a positive integer")
    if N < 1 or n_lo < 1 or n_hi < n_lo:
        raise DomainError("need N >= 1 and 1 <= n_lo <= n_hi")
    t = as_shift(t)
    counter = counter or default_counter()
    ctx = shift_context(t, N)
    E = t.exp()
    harm = harmonic_enclosures(n_hi)
    rows = []
    for n in range(n_lo, n_hi + 1, stride):
        count = _pi_escalating(counter, t, n)
        S = partial_inverse_sum(ctx, n) if n > N else ZERO
        residual = Interval(count) - E * S
        rows.append(ResidualRow(n, residual, residual / (Interval(n).sqrt() * harm[n])))
    return rows


def _pi_escalating(counter: PrimeCounter, t, n: int) -> int:
    cfg = get_config()
    digits = cfg.working_digits
    while True:
        try:
            with precision(digits):
                return counter.pi(t.exp() * n)
        except IntegerBoundary:
            if digits >= cfg.max_refine_digits:
                raise PrecisionExceeded(f"floor(e^t {n}) undecidable")
            digits = min(2 * digits, cfg.max_refine_digits)


def residual_envelope(t, n: int, lam, M=None, alpha_exponent=Fraction(1, 2)) -> Interval:
    """Bound on ``|residual| / (sqrt(n) H_n)`` implied by the harmonic density form.

    ``|residual| < M e^{alpha t} n^alpha (H_n - gamma + t) + lambda e^t``.
    """
    t = as_shift(t)
    M = schoenfeld_m() if M is None else as_interval(M)
    alpha = Fraction(alpha_exponent)
    E = t.exp()
    H = harmonic_enclosures(n)[n]
    bound = M * _exp_scaled(t, E, alpha) * _power(n, alpha) * (H + shift_minus_gamma(t)) + as_interval(lam) * E
    return bound / (Interval(n).sqrt() * H)
