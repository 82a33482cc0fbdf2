"""Occupation-measure LP for the average-cost SMDP and policy extraction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import MN, FullService, ModelParams, State, StationaryPolicy
from .simplex import SimplexError, solve_simplex
from .smdp import SmdpInstance, build_smdp

SUPPORT_TOL = 1e-9
RESIDUAL_TOL = 1e-9


class LpError(RuntimeError):
    """The LP pipeline hit a state that contradicts its construction."""


@dataclass(frozen=True)
class LpProblem:
    keys: List[Tuple[State, int]]  # one column per (state, action)
    c: np.ndarray
    A: np.ndarray  # flow rows (one per state) followed by the normalisation row
    b: np.ndarray
    dropped_row: int  # dependent flow row left out when solving
    row_labels: List[str]

    @property
    def n_variables(self) -> int:
        return len(self.keys)

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]

    def reduced(self):
        keep = np.arange(self.n_constraints) != self.dropped_row
        return self.A[keep], self.b[keep]

    def to_lp_format(self) -> str:
        """CPLEX-style LP text."""
        names = [f"x_{s.i}_{s.delta}_{a}" for s, a in self.keys]

        def expr(coefs):
            parts = []
            for v, nm in zip(coefs, names):
                if v != 0:
                    parts.append(f"{'+' if v > 0 else '-'} {abs(v)!r} {nm}")
            return " ".join(parts) or "0 " + names[0]

        lines = ["Minimize", f" obj: {expr(self.c)}", "Subject To"]
        for label, row, rhs in zip(self.row_labels, self.A, self.b):
            lines.append(f" {label}: {expr(row)} = {rhs!r}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LpSolution:
    x: Dict[Tuple[State, int], float]
    objective: float
    basis: Tuple[int, ...]
    is_basic: bool
    iterations: int
    max_residual: float
    bland_engaged: bool = False


@dataclass(frozen=True)
class AverageSolution:
    policy: StationaryPolicy
    v: float
    case: str  # "full-service", "zero-N" or "MN"
    n_star: int
    lp: Optional[LpSolution] = field(default=None, repr=False)

    @property
    def note(self) -> str:
        if self.case == "full-service":
            return "full-service optimal (any n)"
        return f"({self.policy.M},{self.policy.N})-policy optimal"


def assemble_lp(s: SmdpInstance,
                actions: Optional[Callable[[State], Sequence[int]]] = None) -> LpProblem:
    """Build the LP; ``actions`` optionally restricts the action set per state."""
    idx = {z: k for k, z in enumerate(s.states)}
    keys = [(z, a) for z in s.states for a in (actions(z) if actions else (0, 1))]
    nz = len(s.states)
    A = np.zeros((nz + 1, len(keys)))
    c = np.empty(len(keys))
    for col, (z, a) in enumerate(keys):
        A[idx[z], col] += 1.0
        for nxt, prob in s.trans[z, a]:
            A[idx[nxt], col] -= prob
        A[nz, col] = s.sojourn[z, a]
        c[col] = s.cost[z, a]
    b = np.zeros(nz + 1)
    b[nz] = 1.0
    labels = [f"flow_{z.i}_{z.delta}" for z in s.states] + ["norm"]
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(c))):
        raise LpError("non-finite LP coefficients")

    # flow rows sum to zero; drop one and check the rest has full row rank
    dropped = nz - 1
    keep = np.arange(nz + 1) != dropped
    rank = np.linalg.matrix_rank(A[keep])
    if rank != nz:
        raise LpError(f"constraint matrix rank {rank} after dropping one row, expected {nz}")
    return LpProblem(keys, c, A, b, dropped, labels)


def solve_lp(lp: LpProblem, max_iter: int = 50_000) -> LpSolution:
    A, b = lp.reduced()
    # warm start from the policy that runs whenever allowed
    chosen = {}
    for col, (z, a) in enumerate(lp.keys):
        if z not in chosen or a == 1:
            chosen[z] = col
    start = sorted(chosen.values())
    try:
        res = solve_simplex(lp.c, A, b, basis=start, max_iter=max_iter)
    except SimplexError as exc:
        raise LpError(f"simplex failed: {exc}") from exc
    resid = float(np.max(np.abs(lp.A @ res.x - lp.b)))
    if resid > RESIDUAL_TOL:
        raise LpError(f"feasibility residual {resid:.3e} exceeds {RESIDUAL_TOL}")
    x = {k: float(v) for k, v in zip(lp.keys, res.x)}
    per_state: Dict[State, int] = {}
    for (z, a), v in x.items():
        if v > SUPPORT_TOL:
            per_state[z] = per_state.get(z, 0) + 1
    is_basic = all(n <= 1 for n in per_state.values())
    return LpSolution(x, res.objective, tuple(int(j) for j in res.basis), is_basic,
                      res.iterations, resid, res.bland_engaged)


def extract_policy(sol: LpSolution, s: SmdpInstance) -> AverageSolution:
    if not sol.is_basic:
        raise LpError("LP solution has two positive actions in one state")
    ns = s.n_star

    def pos(i, d, a):
        return sol.x.get((State(i, d), a), 0.0) > SUPPORT_TOL

    on_levels = [i for i in range(1, ns) if pos(i, 0, 1)]
    N = on_levels[0] if on_levels else ns
    off_levels = [i for i in range(1, ns) if pos(i, 1, 0)]
    # under heavy load the empty state's frequency (~e^-rho) can fall below the
    # support threshold; with no switch-off anywhere the policy is still full service
    if pos(0, 1, 1) or (not pos(0, 1, 0) and not off_levels):
        return AverageSolution(FullService(0), sol.objective, "full-service", ns, sol)
    if pos(0, 1, 0):
        return AverageSolution(MN(0, N), sol.objective, "zero-N", ns, sol)
    M = off_levels[0]
    if N <= M:
        raise LpError(f"extracted switch-on level N={N} does not exceed M={M}")
    return AverageSolution(MN(M, N), sol.objective, "MN", ns, sol)


def solve_average(p: ModelParams) -> AverageSolution:
    s = build_smdp(p)
    return extract_policy(solve_lp(assemble_lp(s)), s)
