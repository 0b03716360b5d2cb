"""Command line interface: ``harmonic-li <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 precision exhausted, 4 an inequality
fails, 5 an inequality stays indeterminate.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import tables
from .discretized_li import alpha_star, rho_n_search
from .errors import (
    DomainError,
    HarmonicLiError,
    LimitExceeded,
    NoInteriorMax,
    PrecisionExceeded,
)
from .numeric_core import PrecisionConfig, config_from_env, euler_gamma, format_hi, format_lo, precision
from .prime_counter import PrimeCounter, set_default_counter, default_counter
from .rh_verifier import (
    CSV_COLUMNS,
    FAILS,
    HOLDS,
    INDETERMINATE,
    PRESETS,
    VARIANTS,
    ScanReport,
    generic_bound_check,
    residual_series,
    scan,
    schoenfeld_m,
)
from .shifts import Shift
from .special_functions import soldner_mu

log = logging.getLogger("harmonic_li")

EXIT_OK, EXIT_USAGE, EXIT_PRECISION, EXIT_FAILS, EXIT_INDETERMINATE = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _shift(text: str) -> Shift:
    try:
        return Shift.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _range(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"range must look like a:b, got {text!r}") from exc
    if a < 1 or b < a:
        raise argparse.ArgumentTypeError("range needs 1 <= a <= b")
    return a, b


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    # shared flags are accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=argparse.SUPPRESS, help="working precision in decimal digits")
    common.add_argument("--max-digits", type=int, default=argparse.SUPPRESS, help="ceiling for precision escalation")
    common.add_argument("--cache-path", default=argparse.SUPPRESS, help="prime count cache file (or $HARMONIC_LI_CACHE)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write output to FILE instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="harmonic-li", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    add("constants", help="enclosures of gamma, e^gamma, mu, 1/log mu, alpha*, log alpha*")

    p = add("beta", help="certified bounds on beta(t)")
    p.add_argument("--t", type=_shift, required=True)
    p.add_argument("--n", type=_positive, default=None, help="truncation (default R_t)")

    p = add("table", help="reproduce one of the bound tables")
    p.add_argument("which", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--estimate", action="store_true", help="add an uncertified high-n estimate column")

    p = add("verify", help="scan an inequality preset over a range of n")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--custom", help="M,alpha,C,t,r,lambda (M may be 'schoenfeld' for 1/(8 pi))")
    p.add_argument("--range", type=_range, default=None)
    p.add_argument("--variant", choices=sorted(VARIANTS), default=None, help="bound shape for presets")
    p.add_argument("--form", type=int, choices=(1, 2, 3, 4), default=3, help="inequality form for --custom")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=_positive, default=1)

    p = add("pi", help="exact prime count")
    p.add_argument("--x", type=_rational, required=True)

    p = add("residuals", help="pi(e^t n) minus the harmonic sum, over a range of n")
    p.add_argument("--t", type=_shift, required=True)
    p.add_argument("--N", type=_positive, default=1)
    p.add_argument("--range", type=_range, required=True)
    p.add_argument("--stride", type=int, default=1)

    p = add("rho", help="location of the local maximum of beta_n")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--width", type=_rational, default=Fraction(1, 10**6))
    return parser


# --------------------------------------------------------------------------
# Commands; each returns (text, exit code)
# --------------------------------------------------------------------------

def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_constants(args) -> tuple[str, int]:
    d = args.digits or 13
    inner = d + 5
    with precision(max(inner + 10, 20), max(2 * inner + 20, 200)):
        g = euler_gamma(inner)
        m = soldner_mu(inner)
        a = alpha_star(inner)
        values = [
            ("gamma", g),
            ("exp_gamma", g.exp()),
            ("mu", m),
            ("inv_log_mu", m.log().recip()),
            ("alpha_star", a),
            ("log_alpha_star", a.log()),
        ]
        rows = [["name", "lo", "hi"]] + [[n, format_lo(v, d), format_hi(v, d)] for n, v in values]
    return _csv(rows), EXIT_OK


def cmd_beta(args) -> tuple[str, int]:
    row = tables.beta_row(args.t, args.n)
    return _csv([tables.header(2), tables.format_row(row)]), EXIT_OK


def cmd_table(args) -> tuple[str, int]:
    rows = [tables.header(args.which, args.estimate)]
    code = EXIT_OK
    for row, err in tables.table_rows(args.which, args.estimate):
        if row is None:
            key, exc = err
            rows.append([str(key)] + [""] * (len(rows[0]) - 1))
            code = EXIT_PRECISION
        else:
            rows.append(tables.format_row(row))
    return _csv(rows), code


def _custom_report(spec: str, form: int, rng: tuple[int, int] | None) -> ScanReport:
    import time

    parts = [p.strip() for p in spec.split(",")]
    if len(parts) != 6:
        raise UsageError("--custom needs six comma-separated values: M,alpha,C,t,r,lambda")
    if rng is None:
        raise UsageError("--custom needs --range")
    M_txt, alpha_txt, C_txt, t_txt, r_txt, lam_txt = parts
    try:
        M = schoenfeld_m() if M_txt.lower() == "schoenfeld" else Fraction(M_txt)
        alpha, C, r, lam = Fraction(alpha_txt), Fraction(C_txt), Fraction(r_txt), Fraction(lam_txt)
        t = Shift.parse(t_txt)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --custom value: {exc}") from exc
    start = time.perf_counter()
    results = [generic_bound_check(M, alpha, C, t, r, lam, n, form) for n in range(rng[0], rng[1] + 1)]
    counts = {HOLDS: 0, FAILS: 0, INDETERMINATE: 0}
    for res in results:
        counts[res.verdict] += 1
    return ScanReport(
        preset="custom",
        n_lo=rng[0],
        n_hi=rng[1],
        variant=f"form{form}",
        counts=counts,
        violations=[res.n for res in results if res.verdict == FAILS],
        indeterminate=[res.n for res in results if res.verdict == INDETERMINATE],
        results=results,
        wall_time=time.perf_counter() - start,
        conditional=True,
        cache_checksum=default_counter().cache.source_hash,
    )


def cmd_verify(args) -> tuple[str, int]:
    if args.preset:
        n_lo, n_hi = args.range if args.range else (None, None)
        report = scan(args.preset, n_lo, n_hi, args.variant, workers=args.workers)
    else:
        report = _custom_report(args.custom, args.form, args.range)
    text = report.to_json() if args.format == "json" else report.to_csv()
    log.info("%s: %s violations=%s", report.preset, report.counts, report.violations)
    if report.conditional:
        log.info("range extends beyond the checked proof range; verdicts there are conditional")
    if report.counts[FAILS]:
        return text, EXIT_FAILS
    if report.counts[INDETERMINATE]:
        return text, EXIT_INDETERMINATE
    return text, EXIT_OK


def cmd_pi(args) -> tuple[str, int]:
    return f"{default_counter().pi(args.x)}\n", EXIT_OK


def cmd_residuals(args) -> tuple[str, int]:
    if args.stride < 1:
        raise UsageError("--stride must be a positive integer")
    rows = [["n", "residual_lo", "residual_hi", "normalized_lo", "normalized_hi"]]
    for r in residual_series(args.t, args.N, args.range[0], args.range[1], args.stride):
        rows.append([str(r.n), format_lo(r.residual, 20), format_hi(r.residual, 20),
                     format_lo(r.normalized, 20), format_hi(r.normalized, 20)])
    return _csv(rows), EXIT_OK


def cmd_rho(args) -> tuple[str, int]:
    rho = rho_n_search(args.n, width=args.width)
    return _csv([["n", "rho_lo", "rho_hi"], [str(args.n), format_lo(rho, 15), format_hi(rho, 15)]]), EXIT_OK


COMMANDS = {
    "constants": cmd_constants,
    "beta": cmd_beta,
    "table": cmd_table,
    "verify": cmd_verify,
    "pi": cmd_pi,
    "residuals": cmd_residuals,
    "rho": cmd_rho,
}


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, value in (("digits", None), ("max_digits", None), ("cache_path", None), ("out", None), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, value)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.digits is not None and args.digits < 1:
            raise UsageError("--digits must be positive")
        if args.digits is None:
            config_from_env()
        # constants uses --digits as the requested output accuracy
        wd = args.digits if args.command != "constants" else None
        PrecisionConfig(wd or PrecisionConfig().working_digits, max(args.max_digits or 200, wd or 0))
        cache = args.cache_path or os.environ.get("HARMONIC_LI_CACHE")
        if cache:
            set_default_counter(PrimeCounter(cache))
        with precision(wd, args.max_digits):
            text, code = COMMANDS[args.command](args)
        default_counter().persist()
        _write(text, args.out)
        return code
    except (UsageError, DomainError, LimitExceeded) as exc:
        print(f"harmonic-li: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionExceeded, NoInteriorMax) as exc:
        print(f"harmonic-li: precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except HarmonicLiError as exc:
        print(f"harmonic-li: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
