from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmonic_li.errors import DomainError, IntegerBoundary, PrecisionExceeded
from harmonic_li.numeric_core import (
    BERNOULLI,
    Interval,
    PrecisionConfig,
    bernoulli_even,
    certified_ceil,
    certified_floor,
    escalating,
    euler_gamma,
    exp_gamma,
    format_hi,
    format_lo,
    get_config,
    interval_arith,
    pi_interval,
    precision,
    shifted_bernoulli_term,
)

rationals = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)
nonzero = rationals.filter(lambda q: q != 0)


def _mp(digits=80):
    ctx = mpmath.mp.clone()
    ctx.dps = digits
    return ctx


@settings(max_examples=250, deadline=None)
@given(rationals, rationals)
def test_add_sub_mul_contain_exact(a, b):
    A, B = Interval(a), Interval(b)
    assert (A + B).contains(a + b)
    assert (A - B).contains(a - b)
    assert (A * B).contains(a * b)


@settings(max_examples=250, deadline=None)
@given(rationals, nonzero)
def test_division_contains_exact(a, b):
    assert (Interval(a) / Interval(b)).contains(a / b)
    assert Interval(b).recip().contains(1 / b)


@settings(max_examples=200, deadline=None)
@given(rationals, rationals, rationals)
def test_hull_arithmetic_contains_all_corners(a, b, c):
    lo, hi = min(a, b), max(a, b)
    X = Interval(lo, hi)
    prod = X * Interval(c)
    assert prod.contains(lo * c) and prod.contains(hi * c)
    sq = X.square()
    assert sq.contains(lo * lo) and sq.contains(hi * hi)
    if lo < 0 < hi:
        assert sq.contains(0)


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=Fraction(1, 1000), max_value=1000, max_denominator=1000))
def test_log_exp_sqrt_contain_high_precision_values(q):
    mp = _mp()
    exact = mp.mpf(q.numerator) / q.denominator
    X = Interval(q)
    for iv, ref in ((X.log(), mp.log(exact)), (X.sqrt(), mp.sqrt(exact)), (Interval(q / 100).exp(), mp.exp(exact / 100))):
        lo, hi = mp.mpf(iv.lo), mp.mpf(iv.hi)
        assert lo <= ref <= hi


@settings(max_examples=100, deadline=None)
@given(rationals, st.integers(min_value=0, max_value=9))
def test_pow_int_contains_exact(a, n):
    assert Interval(a).pow_int(n).contains(a**n)


def test_division_by_interval_containing_zero():
    with pytest.raises(DomainError):
        Interval(1) / Interval(-1, 1)
    with pytest.raises(DomainError):
        Interval(0).log()
    with pytest.raises(DomainError):
        Interval(-2).sqrt()


def test_one_third_is_tight():
    third = Interval(1) / 3
    assert third.contains(Fraction(1, 3))
    assert third.width < mpmath.mpf(10) ** -(get_config().working_digits)


def test_monotone_refinement_of_gamma():
    coarse = euler_gamma(15)
    fine = euler_gamma(60)
    assert coarse.overlaps(fine)
    assert fine.width < coarse.width
    assert fine.width <= mpmath.mpf(10) ** -59


def test_gamma_matches_reference_constant():
    mp = _mp(120)
    g = euler_gamma(100)
    assert mp.mpf(g.lo) <= mp.euler <= mp.mpf(g.hi)
    assert g.width <= mpmath.mpf(10) ** -99


def test_gamma_contains_printed_digits():
    g = euler_gamma(13)
    assert Fraction("0.577215664901") <= g.lo_fraction
    assert g.hi_fraction <= Fraction("0.577215664902")


def test_exp_gamma():
    e = exp_gamma()
    assert Fraction("1.781072417990") <= e.lo_fraction <= e.hi_fraction <= Fraction("1.781072417991")


def test_gamma_refuses_excess_precision():
    with precision(40, 60):
        with pytest.raises(PrecisionExceeded):
            euler_gamma(61)


def test_bernoulli_numbers():
    assert [bernoulli_even(k) for k in (1, 2, 3, 4)] == [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30)]
    assert BERNOULLI[1] == Fraction(-1, 2)
    assert BERNOULLI[7] == 0
    assert bernoulli_even(10) == Fraction(-174611, 330)


def test_shifted_bernoulli_term_exact_for_rationals():
    # first term (1 - 1/2) B_2 / (2 x^2) = 1/(24 x^2)
    assert shifted_bernoulli_term(1, Fraction(3, 2)) == Fraction(1, 24) / Fraction(9, 4)


def test_certified_floor_and_ceil():
    assert certified_floor(Interval(Fraction(7, 2))) == 3
    assert certified_ceil(Interval(Fraction(7, 2))) == 4
    with pytest.raises(IntegerBoundary):
        certified_floor(Interval(Fraction(19, 10), Fraction(21, 10)))


def test_escalating_reraises_at_ceiling():
    calls = []

    def always_straddles():
        calls.append(get_config().working_digits)
        raise IntegerBoundary("straddle")

    with precision(20, 80):
        with pytest.raises(IntegerBoundary):
            escalating(always_straddles)
    assert calls == [20, 40, 80]


def test_precision_context_restores():
    before = get_config()
    with precision(90):
        assert get_config().working_digits == 90
    assert get_config() == before


def test_precision_config_validation():
    with pytest.raises(DomainError):
        PrecisionConfig(working_digits=5)
    with pytest.raises(DomainError):
        PrecisionConfig(working_digits=50, max_refine_digits=40)


def test_directed_formatting_brackets_value():
    third = Interval(1) / 3
    assert format_lo(third, 5) == "0.33333"
    assert format_hi(third, 5) == "0.33334"
    assert format_lo(Interval(-1) / 3, 3) == "-0.334"


def test_pi_interval_and_generic_dispatch():
    mp = _mp(60)
    p = pi_interval()
    assert mp.mpf(p.lo) <= mp.pi <= mp.mpf(p.hi)
    assert interval_arith(2, 3, "mul").contains(6)
    assert interval_arith(4, op="sqrt").contains(2)


def test_thousand_random_rationals_all_operations():
    import random

    rng = random.Random(20240601)
    for _ in range(1000):
        a = Fraction(rng.randint(-10**9, 10**9), rng.randint(1, 10**9))
        b = Fraction(rng.randint(-10**9, 10**9) or 1, rng.randint(1, 10**9))
        A, B = Interval(a), Interval(b)
        assert (A + B).contains(a + b)
        assert (A - B).contains(a - b)
        assert (A * B).contains(a * b)
        assert (A / B).contains(a / b)
        assert A.square().contains(a * a)
        assert abs(A).contains(abs(a))
