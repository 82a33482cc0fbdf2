"""Dense two-phase revised simplex for ``min c@x s.t. A@x = b, x >= 0``.

Dantzig pricing by default; after ``stall_limit`` consecutive iterations
without objective decrease the solver switches to Bland's rule for the
rest of the run, which rules out cycling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve


class SimplexError(RuntimeError):
    """Infeasible or unbounded program, or the iteration cap was hit."""


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    basis: np.ndarray
    iterations: int
    bland_engaged: bool


OPT_TOL = 1e-10
PIVOT_TOL = 1e-9
ZERO_TOL = 1e-12
FEAS_TOL = 1e-9


class _Run:
    def __init__(self, A, b, max_iter, stall_limit):
        self.A = A
        self.b = b
        self.m, self.n = A.shape
        self.max_iter = max_iter
        self.stall_limit = stall_limit
        self.iterations = 0
        self.bland = False
        self.bland_used = False

    def factor(self, basis):
        return lu_factor(self.A[:, basis])

    def optimize(self, cost, basis, allowed):
        """Run simplex iterations from ``basis``; ``allowed`` masks candidate entering columns."""
        A, b = self.A, self.b
        stall = 0
        best = np.inf
        while True:
            if self.iterations >= self.max_iter:
                raise SimplexError(f"iteration cap {self.max_iter} exceeded")
            lu = self.factor(basis)
            xB = lu_solve(lu, b)
            # exact zeros keep degenerate ratio ties consistent for Bland's rule
            xB[np.abs(xB) <= ZERO_TOL] = 0.0
            obj = float(cost[basis] @ xB)
            if obj < best - 1e-12 * max(1.0, abs(best) if np.isfinite(best) else 1.0):
                best = obj
                stall = 0
            else:
                stall += 1
                if stall >= self.stall_limit:
                    self.bland = self.bland_used = True
            y = lu_solve(lu, cost[basis], trans=1)
            d = cost - y @ A
            d[basis] = 0.0
            scale = 1.0 + np.abs(cost) + np.abs(y) @ np.abs(A)
            cand = np.flatnonzero(allowed & (d < -OPT_TOL * scale))
            if cand.size == 0:
                return basis, xB
            j = cand[0] if self.bland else cand[np.argmin(d[cand])]
            u = lu_solve(lu, A[:, j])
            pos = u > PIVOT_TOL
            if not pos.any():
                raise SimplexError("problem is unbounded")
            ratios = np.full(self.m, np.inf)
            ratios[pos] = np.maximum(xB[pos], 0.0) / u[pos]
            rmin = ratios.min()
            ties = np.flatnonzero(ratios <= rmin + ZERO_TOL)
            if self.bland:
                r = ties[np.argmin(basis[ties])]
            else:
                r = ties[np.argmax(u[ties])]
            basis = basis.copy()
            basis[r] = j
            self.iterations += 1


def _feasible_basis(A, b, basis):
    if basis is None or len(basis) != A.shape[0]:
        return None
    basis = np.asarray(basis, dtype=int)
    B = A[:, basis]
    if np.linalg.cond(B) > 1e12:
        return None
    xB = np.linalg.solve(B, b)
    return basis if xB.min() >= -FEAS_TOL else None


def solve_simplex(c, A, b, basis=None, max_iter: int = 50_000,
                  stall_limit: int = 50) -> SimplexResult:
    """Solve the standard-form LP.

    ``basis`` may name a starting set of columns; when it is nonsingular and
    primal feasible phase I is skipped, otherwise it is ignored.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    flip = b < 0
    A = np.where(flip[:, None], -A, A)
    b = np.abs(b)

    start = _feasible_basis(A, b, basis)
    if start is not None:
        run = _Run(A, b, max_iter, stall_limit)
        basis, xB = run.optimize(c, start, np.ones(n, dtype=bool))
        return _result(c, n, basis, xB, run)

    # phase I on [A | I]
    Aext = np.hstack([A, np.eye(m)])
    run = _Run(Aext, b, max_iter, stall_limit)
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    allowed = np.ones(n + m, dtype=bool)
    basis, xB = run.optimize(cost1, basis, allowed)
    if float(xB[basis >= n].sum()) > FEAS_TOL:
        raise SimplexError("problem is infeasible")

    # drive zero-level artificials out of the basis
    for r in np.flatnonzero(basis >= n):
        lu = run.factor(basis)
        row = lu_solve(lu, np.eye(m)[r], trans=1) @ A
        row[basis[basis < n]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) <= 1e-9:
            raise SimplexError("redundant constraint row; drop it before solving")
        basis = basis.copy()
        basis[r] = j

    cost2 = np.concatenate([c, np.zeros(m)])
    allowed = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    run.bland = False
    basis, xB = run.optimize(cost2, basis, allowed)
    return _result(c, n, basis, xB, run)


def _result(c, n, basis, xB, run) -> SimplexResult:
    x = np.zeros(n)
    x[basis] = np.where(np.abs(xB) < 1e-13, 0.0, xB)
    if x.min() < -FEAS_TOL:
        raise SimplexError("lost primal feasibility")
    x = np.maximum(x, 0.0)
    return SimplexResult(
        x=x,
        objective=float(c @ x),
        basis=np.sort(basis),
        iterations=run.iterations,
        bland_engaged=run.bland_used,
    )
