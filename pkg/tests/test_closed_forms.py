import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from mminf_switching.closed_forms import (a_threshold, always_on_value, best_zero_n, busy_periods,
                                          full_service_value_off, n_alpha, n_star, n_tilde,
                                          passive_value, t_between, zero_n_average_cost)
from mminf_switching.model import ModelParams, State, ValidationError

params = st.builds(
    ModelParams,
    lam=st.floats(0.1, 10), mu=st.floats(0.2, 5), h=st.floats(0.1, 5),
    c=st.floats(0, 50), s0=st.floats(0, 100), s1=st.floats(0.1, 100),
)


def B_mpmath(lam, mu, i, dps=200):
    """Busy periods from the tail-of-exponential formula in high precision."""
    with mpmath.workdps(dps):
        rho = mpmath.mpf(lam) / mu
        total = mpmath.mpf(0)
        for k in range(i):
            tail = mpmath.e**rho - sum(rho**j / mpmath.factorial(j) for j in range(k + 1))
            total += mpmath.factorial(k) / rho**k * tail
        return float(total / lam)


@pytest.mark.parametrize("mu, c, s1, h, alpha, want", [(1, 100, 100, 1, 1, 400.0),
                                                       (2, 3, 4, 1, 0.5, 6.25)])
def test_a_threshold(mu, c, s1, h, alpha, want):
    p = ModelParams(lam=1, mu=mu, h=h, c=c, s0=1, s1=s1)
    assert a_threshold(p, alpha) == pytest.approx(want, rel=1e-15)


def test_n_alpha_ceiling():
    assert n_alpha(ModelParams(1, 2, 1, 3, 1, 4), 0.5) == 7
    assert n_alpha(ModelParams(1, 1, 1, 100, 1, 100), 1) == 400


def test_n_alpha_small_discount(example):
    # A(alpha) decreases to c/h = 100 from above, so the ceiling is 101
    assert a_threshold(example, 1e-6) > 100
    assert n_alpha(example, 1e-6) == 101


def test_alpha_must_be_positive(example):
    with pytest.raises(ValidationError):
        a_threshold(example, 0.0)


@pytest.mark.parametrize("c, want", [(0.5, 1), (2, 3), (100, 101)])
def test_n_star(c, want):
    assert n_star(ModelParams(1, 1, 1, c, 1, 1)) == want


def test_always_on_value(example):
    assert always_on_value(example, 1, State(0, 1)) == pytest.approx(101)
    assert always_on_value(example, 1, State(0, 0)) == pytest.approx(201)
    assert always_on_value(example, 1, State(3, 1)) == pytest.approx(102.5)


@pytest.mark.parametrize("lam, alpha, i, want", [(2, 1, 0, 2), (2, 1, 5, 7), (1, 0.5, 0, 4)])
def test_passive_value(lam, alpha, i, want):
    assert passive_value(ModelParams(lam, 1, 1, 1, 1, 1), alpha, i) == pytest.approx(want)


def test_full_service_value_off_branches():
    p = ModelParams(lam=2, mu=1, h=1, c=100, s0=100, s1=100)
    n = n_alpha(p, 1)
    assert n == 400
    assert full_service_value_off(p, 1, n) == pytest.approx(p.s1 + always_on_value(p, 1, State(n, 1)))
    want = 399 / 3 + (2 / 3) * (p.s1 + always_on_value(p, 1, State(400, 1)))
    assert full_service_value_off(p, 1, 399) == pytest.approx(want, rel=1e-13)


# at alpha = 1 the gap underflows double precision for most i
@pytest.mark.parametrize("alpha", [0.1, 0.01, 0.001])
def test_full_service_beats_passive(example, alpha):
    for i in range(n_alpha(example, alpha)):
        assert full_service_value_off(example, alpha, i) < passive_value(example, alpha, i)


def test_threshold_monotone_in_alpha(example):
    alphas = np.logspace(-6, 2, 100)
    A = [a_threshold(example, a) for a in alphas]
    n = [n_alpha(example, a) for a in alphas]
    assert all(x < y for x, y in zip(A, A[1:]))
    assert all(x <= y for x, y in zip(n, n[1:]))


def test_busy_period_examples(example):
    B = busy_periods(example, 3).B
    assert B[0] == 0
    assert B[1] == pytest.approx((math.e**2 - 1) / 2, rel=1e-14)
    # independent high-precision evaluation of the same quantity
    assert B[2] == pytest.approx(B_mpmath(2, 1, 2), rel=1e-13)
    assert B[2] == pytest.approx(4.291792, abs=1e-6)


@pytest.mark.parametrize("lam, mu", [(0.5, 1), (2, 1), (10, 1), (30, 2)])
def test_busy_periods_match_high_precision(lam, mu):
    B = busy_periods(ModelParams(lam, mu, 1, 1, 1, 1), 40).B
    for i in (1, 2, 5, 17, 40):
        assert B[i] == pytest.approx(B_mpmath(lam, mu, i), rel=1e-12)
    assert np.all(np.diff(B[1:]) > 0)


def test_t_between_examples(example):
    assert t_between(example, 2) == pytest.approx(0.5972640247, rel=1e-9)
    assert t_between(example, 0) == pytest.approx((math.e**2 - 1) / 2, rel=1e-14)


@pytest.mark.parametrize("lam", [0.5, 2, 10])
def test_t_between_is_busy_period_increment(lam):
    p = ModelParams(lam, 1, 1, 1, 1, 1)
    B = busy_periods(p, 62).B
    for i in range(61):
        assert abs(t_between(p, i) - (B[i + 1] - B[i])) <= 1e-10 * B[i + 1]


def test_zero_n_cost_examples(example):
    # simulation of the (0,1) policy agrees (see test_sim)
    assert zero_n_average_cost(example, 1) == pytest.approx(142.60058497098382, rel=1e-12)
    assert zero_n_average_cost(example, 47) == pytest.approx(51.03, abs=0.01)


def test_n_tilde_examples(example):
    assert n_tilde(example) == 100
    assert n_tilde(ModelParams(1, 1, 1, 1, 0.5, 0.5)) == 1
    assert n_tilde(ModelParams(10, 1, 1, 1, 50, 50)) == 45


@given(params)
def test_n_tilde_is_first_n_meeting_both_conditions(p):
    N = n_tilde(p)
    ok = lambda n: n >= p.c / p.h and n * (n + 1) / (2 * p.lam) >= (p.s0 + p.s1) / p.h
    assert ok(N) and (N == 1 or not ok(N - 1))


def test_best_zero_n_example(example):
    N, v = best_zero_n(example)
    assert N == 47
    assert v == pytest.approx(51.03, abs=0.01)
    assert v == zero_n_average_cost(example, N)


def test_best_zero_n_cheap_switching():
    p = ModelParams(1, 1, 1, 0.5, 0.01, 0.01)
    assert best_zero_n(p)[0] == 1


@given(params)
def test_best_zero_n_is_scan_minimum(p):
    N, v = best_zero_n(p)
    scan = [zero_n_average_cost(p, n) for n in range(1, n_tilde(p) + 21)]
    assert v <= min(scan) + 1e-12 * abs(v)
    assert v == zero_n_average_cost(p, N)


# moderate load: for rho in the tens the (0,N) costs agree to ~1e-15 and the
# ordering is below double resolution
moderate = st.builds(
    ModelParams,
    lam=st.floats(0.1, 10), mu=st.floats(1, 5), h=st.floats(0.1, 5),
    c=st.floats(0, 50), s0=st.floats(0, 100), s1=st.floats(0.1, 100),
)


@given(moderate)
def test_zero_n_cost_increasing_after_n_tilde(p):
    N0 = n_tilde(p)
    v = [zero_n_average_cost(p, n) for n in range(N0, N0 + 22)]
    assert all(x < y for x, y in zip(v, v[1:]))


@given(params)
def test_zero_n_never_beats_always_on_when_running_is_cheap(p):
    # with c = 0 running costs nothing, so running always is optimal
    q = ModelParams(p.lam, p.mu, p.h, 0.0, p.s0, p.s1)
    assert best_zero_n(q)[1] >= q.h * q.rho - 1e-9
