import math
import random
from fractions import Fraction

import mpmath
import pytest

from harmonic_li.discretized_li import (
    ShiftContext,
    alpha_star,
    beta_bounds,
    beta_n,
    beta_range_ceiling_check,
    discrepancies,
    harmonic_mean_shifted,
    partial_inverse_sum,
    r_ceiling,
    rho_n_search,
    shift_context,
    theta_derivative,
    theta_tail_bounds,
)
from harmonic_li.errors import DomainError, NoInteriorMax
from harmonic_li.numeric_core import Interval, euler_gamma
from harmonic_li.shifts import Shift
from harmonic_li.special_functions import harmonic_int, li, soldner_mu, tail_integral

GAMMA = Shift.parse("gamma")
INV_LOG_MU = Fraction("2.684510350820")


def _between(iv, lo, hi):
    return Fraction(lo) <= iv.lo_fraction and iv.hi_fraction <= Fraction(hi)


def test_partial_inverse_sum_examples():
    ctx = shift_context(GAMMA, 1)
    empty = partial_inverse_sum(ctx, 1)
    assert empty.lo_fraction == empty.hi_fraction == 0
    s = partial_inverse_sum(ctx, 3)
    assert s.contains(Fraction(5, 3))
    assert s.hi_fraction - s.lo_fraction < Fraction(1, 10**30)


def test_partial_inverse_sum_second_order_matches_direct_sum():
    ctx = shift_context(0, 1)
    g = euler_gamma(50)
    direct = Interval(0)
    for k in range(1, 4):
        direct = direct + (Interval(harmonic_int(k).exact) - g).square().recip()
    assert partial_inverse_sum(ctx, 4, 2).overlaps(direct)


def test_shift_context_rejects_nonpositive_denominators():
    with pytest.raises(DomainError):
        ShiftContext(-3, 1)
    with pytest.raises(DomainError):
        partial_inverse_sum(shift_context(1, 5), 4)


def test_r_ceiling_examples():
    assert r_ceiling(0).R_t == 2
    assert r_ceiling(Shift.parse("logmu")).R_t == 1
    assert r_ceiling(-1).R_t == 4
    assert r_ceiling(Shift.parse("gamma")).R_t == 1
    rc = r_ceiling(-5)
    assert rc.R_t - 1 < rc.r_t.hi_fraction and rc.r_t.lo_fraction <= rc.R_t


def test_theta_at_start_is_zero():
    theta, _, _ = discrepancies(shift_context(1, 1), 1)
    assert theta.contains(0)


@pytest.mark.parametrize("t,N", [(1, 1), (0, 2), (-1, 4), ("gamma", 1)])
def test_discrepancies_positive_and_strictly_increasing(t, N):
    ctx = shift_context(Shift.parse(str(t)), N)
    prev = None
    for n in range(N, N + 201):
        theta, eta, delta = discrepancies(ctx, n)
        cur = (theta, eta, delta)
        assert eta.is_positive() and delta.is_positive()
        if n > N:
            assert theta.is_positive()
        if prev is not None:
            for a, b in zip(prev, cur):
                assert (b - a).is_positive()
        prev = cur


def test_theta_identity():
    ctx = shift_context(1, 1)
    theta, _, _ = discrepancies(ctx, 20)
    _, eta, delta = discrepancies(ctx, 19)
    assert (theta - eta - delta).contains(0)


def test_theta_tail_bounds_against_large_truncation():
    ctx = shift_context(1, 1)
    theta50 = discrepancies(ctx, 50)[0]
    theta_big = discrepancies(ctx, 5000)[0]
    tail = theta_tail_bounds(ctx, 5000)
    limit_lo = theta_big + tail.lower
    limit_hi = theta_big + tail.upper
    bounds = theta_tail_bounds(ctx, 50)
    assert bounds.lower.lo_fraction <= bounds.upper.hi_fraction
    assert (theta50 + bounds.lower).lo_fraction <= limit_lo.lo_fraction
    assert limit_hi.hi_fraction <= (theta50 + bounds.upper).hi_fraction


def test_theta_tail_gap_shrinks_quadratically():
    ctx = shift_context(1, 1)
    gaps = []
    for n in (50, 100, 200):
        b = theta_tail_bounds(ctx, n)
        gaps.append(float((b.upper - b.lower).mid))
    assert all(g > 0 for g in gaps)
    # doubling n divides the gap by roughly four
    for a, b in zip(gaps, gaps[1:]):
        assert 3.0 < a / b < 5.5


def test_eta_tail_sandwich():
    ctx = shift_context(1, 1)
    eta_big = discrepancies(ctx, 5000)[1]
    # remaining eta tail beyond 5000 is below tail_integral(5000, 1)/24
    extra = tail_integral(5000, 1) / 24
    for n in (10, 50, 200):
        eta_prev = discrepancies(ctx, n - 1)[1]
        lo = tail_integral(n + 1, 1) / 24
        hi = tail_integral(n, 1) / 24
        diff_lo = eta_big - eta_prev
        diff_hi = diff_lo + extra
        assert lo.lo_fraction <= diff_hi.hi_fraction
        assert diff_lo.lo_fraction <= hi.hi_fraction


def test_beta_n_examples():
    assert beta_n(Shift.parse("logmu"), 1, 1).contains(0)
    assert beta_n(0, 2, 2).overlaps(li(2).value)
    v = beta_n(0, 2, 2)
    assert Fraction("1.0451635") < v.lo_fraction and v.hi_fraction < Fraction("1.0451645")
    with pytest.raises(DomainError):
        beta_n(0, 1, 5)


def test_beta_bounds_gamma_row():
    b = beta_bounds(GAMMA, 50)
    assert b.upper.hi_fraction <= Fraction("0.4986013304")
    assert b.lower.lo_fraction >= Fraction("0.4985987518")
    assert b.claim.lo_fraction == b.lower.lo_fraction


def test_beta_bounds_requires_n_at_least_r_t():
    with pytest.raises(DomainError):
        beta_bounds(-1, 3)


@pytest.mark.parametrize("t", [-10, -1, 0, 1, 10])
def test_ceiling_check_ordering(t):
    first, second, third = beta_range_ceiling_check(t)
    assert first.lo_fraction <= second.hi_fraction
    assert second.lo_fraction <= third.hi_fraction


def test_ceiling_check_at_log_mu_and_minus_fifteen():
    assert beta_range_ceiling_check(Shift.parse("logmu"))[0].contains(0)
    first = beta_range_ceiling_check(-15)[0]
    assert Fraction("2.0329649495") <= first.lo_fraction and first.hi_fraction <= Fraction("2.0329649505")


def test_ordering_chain_random_shifts():
    rng = random.Random(3)
    for _ in range(100):
        t = Fraction(rng.randint(-15000, 15000), 1000)
        first, second, third = beta_range_ceiling_check(t)
        assert first.lo_fraction >= -Fraction(1, 10**20)
        assert first.lo_fraction <= second.hi_fraction <= third.hi_fraction + Fraction(1, 10**20)


GRID = [str(t) for t in range(-15, 16)] + ["gamma", "log2", "1", "gamma+1"]


def test_beta_upper_below_inverse_log_mu_on_grid():
    for t in GRID:
        shift = Shift.parse(t)
        b = beta_bounds(shift, r_ceiling(shift).R_t)
        assert b.upper.hi_fraction < INV_LOG_MU, t


def test_beta_below_supremum_on_positive_side():
    for t in ["logmu", "1", "2", "5", "10", "15"]:
        shift = Shift.parse(t)
        b = beta_bounds(shift, max(50, r_ceiling(shift).R_t))
        assert b.upper.hi_fraction < Fraction("2.0248040")


def test_alpha_star_constants():
    a = alpha_star(13)
    assert _between(a, "3.846467717046", "3.846467717047")
    assert (li(a).value - a / a.log()).contains(0)
    assert _between(a.log(), "1.347155251069", "1.347155251070")


def test_harmonic_mean_shifted():
    assert harmonic_mean_shifted(0, 1).contains(1)
    assert harmonic_mean_shifted(0, 3).contains(Fraction(99, 73))
    # 1/M = (1/n) sum 1/(H_k - gamma + (t + gamma))
    t = Fraction(1, 2)
    shifted = Interval(t) + euler_gamma(60)
    ctx = ShiftContext(shifted, 1)
    lhs = harmonic_mean_shifted(t, 30).recip()
    rhs = partial_inverse_sum(ctx, 31) / 30
    assert lhs.overlaps(rhs)
    with pytest.raises(DomainError):
        harmonic_mean_shifted(-2, 3)


def test_total_monotonicity_signs():
    ctx = shift_context(1, 1)
    for order in (0, 1, 2):
        a = theta_derivative(ctx, 1000, order)
        b = theta_derivative(ctx, 2000, order)
        assert a.is_positive() and b.is_positive()
        assert (b - a).is_positive()


def _theta_estimate(t: Fraction, n: int) -> Fraction:
    ctx = ShiftContext(Interval(t), 1)
    theta = discrepancies(ctx, n)[0]
    tail = theta_tail_bounds(ctx, n)
    return (theta + tail.lower).mid / 2 + (theta + tail.upper).mid / 2


def test_theta_derivative_matches_finite_difference():
    h = Fraction(1, 10**4)
    n = 2000
    fd = (_theta_estimate(1 + h, n) - _theta_estimate(1 - h, n)) / (2 * h)
    deriv = -theta_derivative(shift_context(1, 1), n, 1)
    assert abs(fd - deriv.mid) < Fraction(1, 10**6)


def test_rho_search_small_n():
    rho1 = rho_n_search(1, width=Fraction(1, 10**8))
    assert rho1.overlaps(alpha_star().log()) or abs(rho1.mid - alpha_star().log().mid) < Fraction(1, 10**7)
    rho2 = rho_n_search(2)
    assert round(float(rho2.mid), 5) == 1.29475
    assert rho2.hi_fraction - rho2.lo_fraction <= Fraction(1, 10**6)


def test_rho_decreases_over_first_ten():
    values = [rho_n_search(n, width=Fraction(1, 10**8)) for n in range(1, 11)]
    for a, b in zip(values, values[1:]):
        assert b.hi_fraction < a.lo_fraction


def test_rho_search_without_sign_change():
    with pytest.raises(NoInteriorMax):
        rho_n_search(3, bracket=(Fraction(3, 2), 2))


def _rho_oracle(n: int):
    """Root of d/dt beta_n by plain floating-point root finding in mpmath."""
    with mpmath.workdps(30):
        H = [mpmath.harmonic(k) for k in range(n)]

        def deriv(t):
            x = mpmath.exp(t) * n
            d_li = n / mpmath.log(x) - mpmath.li(x) / mpmath.exp(t)
            return d_li + sum(1 / (H[k] - mpmath.euler + t) ** 2 for k in range(1, n))

        return mpmath.findroot(deriv, 1.28)


@pytest.mark.parametrize("n", [4, 7, 10])
def test_rho_matches_independent_root_finder(n):
    rho = rho_n_search(n, width=Fraction(1, 10**10))
    ref = _rho_oracle(n)
    assert abs(float(rho.mid) - float(ref)) < 1e-9
