"""Independent oracles.

* exact long-run average cost of (M,N) and full-service policies, from
  first-passage linear systems of the all-on birth-death chain and the
  renewal-reward theorem;
* discounted-cost solver on a truncated state space, returning the
  switch-off and switch-on levels of a discount-optimal policy.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .closed_forms import always_on_value, n_alpha, n_star, t_between
from .model import MN, FullService, ModelParams, State, StationaryPolicy

TRUNCATION_MARGIN = 40
SENSITIVITY_STEP = 20
SENSITIVITY_RTOL = 1e-10


class TruncationError(ArithmeticError):
    """Truncated results moved too much when the truncation level was raised."""


def truncation_level(p: ModelParams, top: int) -> int:
    """Truncation level above every level of interest and well past the Poisson(rho) bulk."""
    bulk = math.ceil(p.rho + 12 * math.sqrt(p.rho + 1))
    return max(top, bulk) + TRUNCATION_MARGIN


@dataclass(frozen=True)
class FirstPassageSolution:
    M: int
    L: int
    t: np.ndarray  # t[k]: expected time to reach M from M+k, all servers on
    g: np.ndarray  # g[k]: expected holding + running cost on the way

    def time(self, i: int) -> float:
        return float(self.t[i - self.M])

    def cost(self, i: int) -> float:
        return float(self.g[i - self.M])


def _solve_levels(p: ModelParams, M: int, L: int):
    """Solve the first-passage equations on levels ``M..L`` by eliminating from the top.

    Writing ``d_i = t_i - t_{i-1}`` turns row ``i`` of the tridiagonal system into
    ``i mu d_i = 1 + lam d_{i+1}``; the backward sweep adds positive terms only,
    so it keeps full relative accuracy even when ``t`` spans many magnitudes.
    """
    lam, mu = p.lam, p.mu
    n = L - M
    dt = np.empty(n)
    dg = np.empty(n)
    # top level: times close with the exact tail t_L - t_{L-1} = T_{L-1};
    # costs use a reflecting boundary (no arrivals at L)
    dt[-1] = t_between(p, L - 1)
    dg[-1] = (p.h * L + p.c) / (L * mu)
    for k in range(n - 2, -1, -1):
        i = M + 1 + k
        dt[k] = (1.0 + lam * dt[k + 1]) / (i * mu)
        dg[k] = (p.h * i + p.c + lam * dg[k + 1]) / (i * mu)
    t = np.concatenate(([0.0], np.cumsum(dt)))
    g = np.concatenate(([0.0], np.cumsum(dg)))
    return t, g


def first_passage(p: ModelParams, M: int, start_max: int, L: int | None = None,
                  check: bool = True) -> FirstPassageSolution:
    """Expected time and cost for the all-on queue to fall to ``M`` from each level up to ``L``.

    With ``check`` the system is re-solved with ``L + 20`` and levels up to
    ``start_max`` must agree to ``SENSITIVITY_RTOL``.
    """
    if M < 0:
        raise ValueError("floor level M must be >= 0")
    start_max = max(start_max, M + 1)
    if L is None:
        L = truncation_level(p, max(start_max, n_star(p) if p.h > 0 else 0))
    if L <= start_max:
        raise ValueError("truncation level must exceed start_max")
    t, g = _solve_levels(p, M, L)
    if check:
        t2, g2 = _solve_levels(p, M, L + SENSITIVITY_STEP)
        k = start_max - M + 1
        for a, b in ((t[:k], t2[:k]), (g[:k], g2[:k])):
            err = np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))
            if err > SENSITIVITY_RTOL:
                raise TruncationError(
                    f"first-passage values moved by {err:.2e} relative when L={L} "
                    f"was raised by {SENSITIVITY_STEP}; use a larger L")
    return FirstPassageSolution(M=M, L=L, t=t, g=g)


def evaluate_mn_exact(p: ModelParams, M: int, N: int,
                      fp: FirstPassageSolution | None = None) -> float:
    """Renewal-reward average cost of the (M,N)-policy.

    One cycle: ``N - M`` arrivals while off, then the all-on descent from
    ``N`` back to ``M``; both switching costs are paid once.
    """
    if not 0 <= M < N:
        raise ValueError(f"need 0 <= M < N, got ({M}, {N})")
    if fp is None or fp.M != M or fp.L <= N:
        fp = first_passage(p, M, N)
    off_cost = p.h * (M + N - 1) * (N - M) / (2 * p.lam)
    num = off_cost + p.s1 + fp.cost(N) + p.s0
    den = (N - M) / p.lam + fp.time(N)
    return num / den


def evaluate_full_service_exact(p: ModelParams) -> float:
    """Average cost of any full-service policy: Poisson(rho) queue, always running."""
    return p.h * p.rho + p.c


def evaluate_policy_exact(p: ModelParams, pol: StationaryPolicy) -> float:
    if isinstance(pol, MN):
        return evaluate_mn_exact(p, pol.M, pol.N)
    if isinstance(pol, FullService):
        return evaluate_full_service_exact(p)
    raise TypeError(f"no exact evaluator for {type(pol).__name__} policies")


def enumerate_mn(p: ModelParams, n_max: int | None = None) -> dict:
    """Exact average cost of every (M,N) with ``0 <= M < N <= n_max`` (default ``n*``)."""
    n_max = n_star(p) if n_max is None else n_max
    out = {}
    for M in range(n_max):
        fp = first_passage(p, M, n_max)
        for N in range(M + 1, n_max + 1):
            out[M, N] = evaluate_mn_exact(p, M, N, fp)
    return out


@dataclass(frozen=True)
class DiscountedSolution:
    alpha: float
    L: int
    V: np.ndarray  # shape (L+1, 2), column = delta
    V_on: np.ndarray  # value of running first, shape (L, 2)
    V_off: np.ndarray  # value of idling first, shape (L, 2)
    M_star: int
    N_star: int
    n_alpha: int
    iterations: int
    residual: float

    def action(self, i: int, delta: int) -> int:
        """Greedy action; exact ties keep the current status."""
        if i >= self.n_alpha or i >= self.L:
            return 1
        on, off = self.V_on[i, delta], self.V_off[i, delta]
        if on == off:
            return delta
        return int(on < off)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "V_off_state", "V_on_state", "V1_off_state", "V0_off_state",
                    "V1_on_state", "V0_on_state"])
        for i in range(self.L):
            w.writerow([i, repr(float(self.V[i, 0])), repr(float(self.V[i, 1])),
                        repr(float(self.V_on[i, 0])), repr(float(self.V_off[i, 0])),
                        repr(float(self.V_on[i, 1])), repr(float(self.V_off[i, 1]))])
        return buf.getvalue()


class _Discounted:
    """Bellman operator on levels ``0..L-1`` with levels ``>= L`` pinned to the always-on value."""

    def __init__(self, p: ModelParams, alpha: float, L: int):
        self.p, self.alpha, self.L = p, alpha, L
        i = np.arange(L, dtype=float)
        self.i = i
        r1 = alpha + p.lam + i * p.mu
        self.up1 = p.lam / r1
        self.down1 = i * p.mu / r1
        self.run1 = (p.h * i + p.c) / r1
        r0 = alpha + p.lam
        self.up0 = p.lam / r0
        self.run0 = p.h * i / r0
        self.top = np.array([always_on_value(p, alpha, State(L, d)) for d in (0, 1)])

    def q_values(self, V):
        """``(V_on, V_off)``, each of shape (L, 2), given ``V`` of shape (L, 2)."""
        p = self.p
        V1 = np.append(V[:, 1], self.top[1])
        V0 = np.append(V[:, 0], self.top[0])
        below = np.concatenate(([0.0], V1[:-2]))
        base_on = self.run1 + self.up1 * V1[1:] + self.down1 * below
        base_off = self.run0 + self.up0 * V0[1:]
        V_on = np.column_stack([p.s1 + base_on, base_on])
        V_off = np.column_stack([base_off, p.s0 + base_off])
        return V_on, V_off

    def evaluate(self, pol):
        """Solve for the value of the stationary action table ``pol`` (shape (L, 2))."""
        L, p = self.L, self.p
        n = 2 * L
        A = np.eye(n)
        b = np.zeros(n)
        for i in range(L):
            for d in (0, 1):
                row = 2 * i + d
                if pol[i, d] == 1:
                    b[row] = (1 - d) * p.s1 + self.run1[i]
                    if i + 1 < L:
                        A[row, 2 * (i + 1) + 1] -= self.up1[i]
                    else:
                        b[row] += self.up1[i] * self.top[1]
                    if i > 0:
                        A[row, 2 * (i - 1) + 1] -= self.down1[i]
                else:
                    b[row] = d * p.s0 + self.run0[i]
                    if i + 1 < L:
                        A[row, 2 * (i + 1)] -= self.up0
                    else:
                        b[row] += self.up0 * self.top[0]
        x = np.linalg.solve(A, b)
        # one step of iterative refinement; the system is ill-conditioned for small alpha
        x += np.linalg.solve(A, b - A @ x)
        return x.reshape(L, 2)


def _greedy(V_on, V_off, current):
    better_on = V_on < V_off
    better_off = V_off < V_on
    scale = 1e-12 * np.maximum(np.abs(V_on), np.abs(V_off))
    new = current.copy()
    new[better_on & (V_off - V_on > scale)] = 1
    new[better_off & (V_on - V_off > scale)] = 0
    return new


def solve_discounted(p: ModelParams, alpha: float, tol: float = 1e-9, L: int | None = None,
                     method: str = "policy", max_iter: int = 10**6) -> DiscountedSolution:
    """Discount-optimal values on ``{0..L-1} x {0,1}`` and the thresholds ``M*``, ``N*``.

    ``method="policy"`` runs policy iteration with exact linear solves;
    ``method="value"`` runs plain value iteration until the sup-norm change
    drops below ``tol`` (only practical for moderate ``alpha``).
    """
    if not alpha > 0 or not tol > 0:
        raise ValueError("alpha and tol must be positive")
    na = n_alpha(p, alpha)
    if L is None:
        L = truncation_level(p, na)
    op = _Discounted(p, alpha, L)

    if method == "policy":
        pol = np.ones((L, 2), dtype=int)
        for it in range(1, max_iter + 1):
            V = op.evaluate(pol)
            V_on, V_off = op.q_values(V)
            new = _greedy(V_on, V_off, pol)
            if np.array_equal(new, pol):
                break
            pol = new
        else:
            raise ArithmeticError(f"policy iteration did not settle in {max_iter} steps")
    elif method == "value":
        # start from the always-on values, an upper bound
        V = np.array([[always_on_value(p, alpha, State(i, d)) for d in (0, 1)]
                      for i in range(L)])
        for it in range(1, max_iter + 1):
            V_on, V_off = op.q_values(V)
            new = np.minimum(V_on, V_off)
            change = float(np.max(np.abs(new - V)))
            V = new
            if change < tol:
                break
        else:
            raise ArithmeticError(
                f"value iteration stalled: sup-norm change {change:.3e} after {max_iter} sweeps "
                f"(alpha={alpha}, L={L}); use method='policy'")
    else:
        raise ValueError(f"unknown method {method!r}")

    V_on, V_off = op.q_values(V)
    residual = float(np.max(np.abs(np.minimum(V_on, V_off) - V)))
    off_ok = np.flatnonzero(V_off[:, 1] <= V_on[:, 1])
    M_star = int(off_ok.max()) if off_ok.size else -1
    on_ok = [i for i in range(M_star + 1, L) if V_on[i, 0] <= V_off[i, 0]]
    N_star = on_ok[0] if on_ok else L
    full_V = np.vstack([V, op.top])
    return DiscountedSolution(alpha=alpha, L=L, V=full_V, V_on=V_on, V_off=V_off,
                              M_star=M_star, N_star=N_star, n_alpha=na,
                              iterations=it, residual=residual)
