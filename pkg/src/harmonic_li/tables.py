"""Row generators for the bound tables emitted by the command line."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from .discretized_li import beta_bounds, beta_range_ceiling_check, r_ceiling, rho_n_search
from .errors import HarmonicLiError
from .numeric_core import Interval, format_hi, format_lo
from .shifts import Shift

log = logging.getLogger(__name__)

TABLE1_T = tuple(range(15, -16, -1))
TABLE2_T = ("gamma+1", "logalpha", "1", "log2", "gamma", "logmu", "0", "-log2", "-1")
TABLE2_N = 50
TABLE3_N = tuple(range(1, 11)) + (4000, 5000)
TABLE4_T = ("1.274", "1.280", "1.281", "1.282", "1.283", "1.284", "1.285", "1.290")
TABLE4_N = 100
ESTIMATE_EXTRA = 1000


@dataclass(frozen=True)
class BetaRow:
    t: str
    n: int
    R_t: int
    upper: Interval
    lower: Interval
    li_scaled: Interval
    estimate: Fraction | None = None


@dataclass(frozen=True)
class RhoRow:
    n: int
    rho: Interval


def _estimate(t: Shift, R: int, n: int) -> Fraction:
    """Uncertified point estimate: midpoint of the bracket at a larger truncation."""
    b = beta_bounds(t, max(n, R) + ESTIMATE_EXTRA)
    return (b.lower.mid + b.upper.mid) / 2


def beta_row(t, n: int | None = None, estimate: bool = False) -> BetaRow:
    """Bounds on ``beta(t)`` at truncation ``n`` (``R_t`` when omitted)."""
    shift = t if isinstance(t, Shift) else Shift.parse(str(t))
    R = r_ceiling(shift).R_t
    n = R if n is None else n
    b = beta_bounds(shift, n)
    first = beta_range_ceiling_check(shift)[0]
    est = _estimate(shift, R, n) if estimate else None
    return BetaRow(str(shift), n, R, b.upper, b.lower, first, est)


def table_rows(which: int, estimate: bool = False, width: Fraction = Fraction(1, 10**9)):
    """Yield ``(row | None, error | None)`` so a failing row does not stop the table."""
    if which == 1:
        specs = [(str(t), None) for t in TABLE1_T]
    elif which == 2:
        specs = [(t, TABLE2_N) for t in TABLE2_T]
    elif which == 4:
        specs = [(t, TABLE4_N) for t in TABLE4_T]
    elif which == 3:
        for n in TABLE3_N:
            try:
                yield RhoRow(n, rho_n_search(n, width=width)), None
            except HarmonicLiError as exc:
                log.error("table 3 row n=%s failed: %s", n, exc)
                yield None, (n, exc)
        return
    else:
        raise ValueError("table must be 1, 2, 3 or 4")
    for t, n in specs:
        try:
            yield beta_row(t, n, estimate), None
        except HarmonicLiError as exc:
            log.error("table %s row t=%s failed: %s", which, t, exc)
            yield None, (t, exc)


def header(which: int, estimate: bool = False) -> list[str]:
    if which == 3:
        return ["n", "rho_lo", "rho_hi"]
    cols = ["t", "n", "upper", "lower", "li_scaled_lo", "li_scaled_hi", "R_t"]
    return cols + (["estimate"] if estimate else [])


def format_row(row, sig: int = 15) -> list[str]:
    if isinstance(row, RhoRow):
        return [str(row.n), format_lo(row.rho, sig), format_hi(row.rho, sig)]
    out = [
        row.t,
        str(row.n),
        format_hi(row.upper, sig),
        format_lo(row.lower, sig),
        format_lo(row.li_scaled, sig),
        format_hi(row.li_scaled, sig),
        str(row.R_t),
    ]
    if row.estimate is not None:
        out.append(f"{float(row.estimate):.12g}")
    return out
