from fractions import Fraction

import pytest

from harmonic_li.discretized_li import beta_bounds, partial_inverse_sum, r_ceiling, shift_context
from harmonic_li.errors import DomainError
from harmonic_li.numeric_core import Interval, pi_interval
from harmonic_li.prime_counter import default_counter
from harmonic_li.rh_verifier import (
    CSV_COLUMNS,
    FAILS,
    HOLDS,
    INDETERMINATE,
    PRESETS,
    CheckResult,
    _verdict,
    evaluate_inequality,
    generic_bound_check,
    residual_series,
    scan,
    schoenfeld_m,
)
from harmonic_li.shifts import Shift


def test_schoenfeld_constant():
    assert (schoenfeld_m() * pi_interval() * 8).contains(1)


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_preset_lambdas_are_admissible(preset):
    p = PRESETS[preset]
    R = r_ceiling(p.t).R_t
    b = beta_bounds(p.t, max(50, R))
    # starting the sum later adds the skipped terms back to beta
    skipped = partial_inverse_sum(shift_context(p.t, R), p.sum_start)
    assert (b.upper + skipped).hi_fraction <= Fraction(p.lam)


def test_verdict_trichotomy():
    assert _verdict(Interval(Fraction(1, 10), 1)) == HOLDS
    assert _verdict(Interval(-1, Fraction(-1, 10))) == FAILS
    assert _verdict(Interval(-1, 1)) == INDETERMINATE


def test_rh9_examples():
    bad = evaluate_inequality("rh9", 82)
    assert bad.verdict == FAILS
    assert bad.margin.hi_fraction < 0
    assert evaluate_inequality("rh9", 100).verdict == HOLDS
    assert evaluate_inequality("rh5", 803).verdict == HOLDS


def test_conditional_outside_proof_range():
    assert not evaluate_inequality("rh5", 803).conditional
    assert evaluate_inequality("rh5", 1600).conditional


@pytest.mark.parametrize("variant", ["log", "harmonic"])
def test_short_scans(variant):
    report = scan("rh9", 75, 90, variant)
    assert report.violations == [82]
    assert sum(report.counts.values()) == 16
    assert report.indeterminate == []


def test_harmonic_form_is_weaker_than_log_form():
    # H_n - gamma > log n, so the harmonic-shape bound is larger
    for n in (10, 100, 1000):
        a = evaluate_inequality("rh5", n, "log")
        b = evaluate_inequality("rh5", n, "harmonic")
        assert (b.rhs - a.rhs).is_positive()
        assert a.lhs.overlaps(b.lhs)


def test_generic_matches_preset():
    p = PRESETS["rh5"]
    for n in (1492, 2000, 3000):
        g = generic_bound_check(schoenfeld_m(), p.alpha_exponent, p.C, p.t, 1, Fraction(p.lam), n, 3)
        e = evaluate_inequality(p, n)
        assert g.verdict == e.verdict
        assert g.margin.overlaps(e.margin)


def test_generic_form_two_exceeds_form_one():
    t = Shift.parse("gamma")
    one = generic_bound_check(schoenfeld_m(), Fraction(1, 2), 1, t, 1, Fraction("0.4986013304"), 1000, 1)
    two = generic_bound_check(schoenfeld_m(), Fraction(1, 2), 1, t, 1, Fraction("0.4986013304"), 1000, 2)
    assert (two.rhs - one.rhs).is_positive()


def test_generic_slack_bound_holds():
    r = generic_bound_check(1000, 1, 1, 1, 1, 1, 10**4, 3)
    assert r.verdict == HOLDS


def test_generic_preconditions():
    with pytest.raises(DomainError):
        generic_bound_check(schoenfeld_m(), Fraction(1, 2), 2657, 0, 1, 1, 2000, 3)
    with pytest.raises(DomainError):
        generic_bound_check(schoenfeld_m(), Fraction(1, 2), 2657, 0, 2, 1, 100, 3)
    with pytest.raises(DomainError):
        generic_bound_check(schoenfeld_m(), Fraction(1, 2), 1, 0, 2, 1, 100, 7)


def test_residual_series_compositional():
    t = Shift.parse("gamma")
    (row,) = residual_series(t, 1, 10, 10)
    E = t.exp()
    count = default_counter().pi(E * 10)
    expected = Interval(count) - E * partial_inverse_sum(shift_context(t, 1), 10)
    assert row.residual.overlaps(expected)
    rows = residual_series(t, 1, 10, 20, stride=5)
    assert [r.n for r in rows] == [10, 15, 20]


def test_residual_series_rejects_bad_stride():
    with pytest.raises(DomainError):
        residual_series("gamma", 1, 10, 20, stride=0)


def test_reports_are_deterministic_across_workers():
    a = scan("rh8a", 714, 900, workers=1)
    b = scan("rh8a", 714, 900, workers=2)
    assert a.to_csv() == b.to_csv()
    assert a.counts == b.counts


def test_report_formats():
    import json

    report = scan("rh9", 80, 83)
    lines = report.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5
    assert lines[3].split(",")[-1] == FAILS
    meta = json.loads(report.to_json())["metadata"]
    assert meta["violations"] == [82]
    assert meta["cache_checksum"]
    assert isinstance(report.results[0], CheckResult)


def test_residuals_inside_envelope_from_803():
    from harmonic_li.rh_verifier import residual_envelope

    t = Shift.parse("gamma")
    lam = Fraction("0.4986013304")
    for row in residual_series(t, 1, 803, 5000, stride=7):
        assert abs(row.normalized).certainly_lt(residual_envelope(t, row.n, lam))
