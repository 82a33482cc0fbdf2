"""Closed-form quantities: discounted full-service values, switching thresholds,
M/M/inf busy periods and the average cost of (0,N)-policies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, State, ValidationError

# Truncation of the positive busy-period tail series.
SERIES_RTOL = 1e-14
SERIES_ATOL = 1e-30
SERIES_MAX_TERMS = 10**6


def _check_alpha(alpha: float) -> float:
    if not alpha > 0:
        raise ValidationError(f"discount rate must be positive, got {alpha!r}", field="alpha")
    return float(alpha)


def a_threshold(p: ModelParams, alpha: float) -> float:
    """Queue length above which an idle system should be started (full-service class)."""
    alpha = _check_alpha(alpha)
    return (p.mu + alpha) * (p.c + alpha * p.s1) / (p.h * p.mu)


def n_alpha(p: ModelParams, alpha: float) -> int:
    a = a_threshold(p, alpha)
    r = round(a)
    # snap values that are integers up to rounding noise
    if abs(a - r) <= 1e-12 * max(1.0, abs(a)):
        return int(r)
    return math.ceil(a)


def n_star(p: ModelParams) -> int:
    """Level from which running is average-optimal in every state."""
    return math.floor(p.c / p.h + 1)


def always_on_value(p: ModelParams, alpha: float, s: State) -> float:
    alpha = _check_alpha(alpha)
    return ((1 - s.delta) * p.s1 + p.h * s.i / (p.mu + alpha)
            + p.h * p.lam / (alpha * (p.mu + alpha)) + p.c / alpha)


def passive_value(p: ModelParams, alpha: float, i: int) -> float:
    """Discounted cost of never starting an idle system that holds ``i`` customers."""
    alpha = _check_alpha(alpha)
    return p.h * i / alpha + p.h * p.lam / alpha**2


def full_service_value_off(p: ModelParams, alpha: float, i: int) -> float:
    """Optimal discounted cost from ``(i, 0)`` among policies that never switch off."""
    n = n_alpha(p, alpha)
    top = always_on_value(p, alpha, State(max(i, n), 0))
    if i >= n:
        return top
    q = p.lam / (p.lam + alpha)
    k = np.arange(n - i)
    waiting = float(np.sum(q**k * p.h * (i + k) / (p.lam + alpha)))
    return waiting + q ** (n - i) * top


def m_star_bound(p: ModelParams) -> float:
    """Upper bound on the switch-off level of any discount-optimal policy (inf if s0 = 0)."""
    if p.s0 <= 0:
        return math.inf
    return p.rho + (p.c + p.s0 * p.mu) ** 2 / (4 * p.s0 * p.h * p.mu)


def _tail_factor(rho: float, k: int) -> float:
    """``k!/rho^k * sum_{j>k} rho^j/j!`` summed as ``sum_{m>=1} rho^m k!/(k+m)!``.

    All terms are positive, so there is no cancellation. Terms grow while
    ``k + m < rho`` and the stopping rule only applies past that point.
    """
    term = rho / (k + 1)
    total = term
    m = 1
    while True:
        m += 1
        if m > SERIES_MAX_TERMS:
            raise ArithmeticError(f"busy-period series did not converge (rho={rho}, k={k})")
        term *= rho / (k + m)
        total += term
        if k + m >= rho and (term < SERIES_RTOL * total or term < SERIES_ATOL):
            break
    if not math.isfinite(total):
        raise OverflowError(f"busy-period series overflows for rho={rho}")
    return total


@dataclass(frozen=True)
class BusyPeriodTable:
    rho: float
    lam: float
    B: np.ndarray
    L: int

    def T(self, i: int) -> float:
        return float(self.B[i + 1] - self.B[i])


def busy_periods(p: ModelParams, L: int) -> BusyPeriodTable:
    """Expected all-on busy periods ``B_0..B_L`` (``B_i`` starts with ``i`` customers)."""
    if L < 1:
        raise ValidationError("busy-period table needs L >= 1", field="L")
    rho = p.rho
    r = np.empty(L)
    r[0] = math.expm1(rho)
    for k in range(1, L):
        r[k] = _tail_factor(rho, k)
    if not np.all(np.isfinite(r)):
        raise OverflowError(f"busy-period terms overflow for rho={rho}")
    B = np.concatenate(([0.0], np.cumsum(r) / p.lam))
    return BusyPeriodTable(rho=rho, lam=p.lam, B=B, L=L)


def t_between(p: ModelParams, i: int) -> float:
    """Expected time to go from ``i+1`` down to ``i`` customers with all servers on.

    Series ``(1/lam) * sum_k rho^(k+1) / ((i+1)(i+2)...(i+1+k))``.
    """
    if i < 0:
        raise ValidationError("t_between needs i >= 0", field="i")
    rho = p.rho
    term = rho / (i + 1)
    total = term
    k = 0
    while True:
        k += 1
        if k > SERIES_MAX_TERMS:
            raise ArithmeticError(f"T_i series did not converge (rho={rho}, i={i})")
        term *= rho / (i + 1 + k)
        total += term
        if i + 1 + k >= rho and (term < SERIES_RTOL * total or term < SERIES_ATOL):
            break
    return total / p.lam


def _zero_n_costs(p: ModelParams, B: np.ndarray, N: np.ndarray) -> np.ndarray:
    BN = B[N]
    queue = p.rho + (N - 1) / 2 * N / (N + p.lam * BN)
    return p.h * queue + (p.s0 + p.s1 + p.c * BN) / (N / p.lam + BN)


def zero_n_average_cost(p: ModelParams, N: int) -> float:
    """Long-run average cost of the (0,N)-policy."""
    if N < 1:
        raise ValidationError("(0,N)-policy needs N >= 1", field="N")
    B = busy_periods(p, N).B
    return float(_zero_n_costs(p, B, np.array([N]))[0])


def n_tilde(p: ModelParams) -> int:
    """Search bound beyond which (0,N) costs increase in N."""
    ratio = (p.s0 + p.s1) / p.h
    # smallest N with N(N+1) >= 2*lam*ratio, then nudge for rounding
    n = math.ceil((-1 + math.sqrt(1 + 8 * p.lam * ratio)) / 2)
    n = max(n, math.ceil(p.c / p.h), 1)
    while n > 1 and n - 1 >= p.c / p.h and (n - 1) * n / (2 * p.lam) >= ratio:
        n -= 1
    while n * (n + 1) / (2 * p.lam) < ratio:
        n += 1
    return n


def best_zero_n(p: ModelParams) -> tuple[int, float]:
    """Exhaustive minimum of the (0,N) average cost over ``1..n_tilde``; ties go to smaller N."""
    nt = n_tilde(p)
    B = busy_periods(p, nt).B
    N = np.arange(1, nt + 1)
    v = _zero_n_costs(p, B, N)
    k = int(np.argmin(v))
    return int(N[k]), float(v[k])
