"""Finite semi-Markov decision process on levels ``0..n*-1``.

Interior levels keep the exponential-jump dynamics of the original model.
The top level ``n*-1`` absorbs the whole excursion above it: an arrival
there starts a loop that only returns once the queue is back at ``n*-1``
with all servers running.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from .closed_forms import n_star, t_between
from .model import ModelParams, State, validate_params

Key = Tuple[State, int]

M_SERIES_MAX_TERMS = 10**6


@dataclass(frozen=True)
class BoundaryQuantities:
    n_star: int
    T_top: float
    m: np.ndarray  # m[k] = expected visits to level n*-1+k per loop
    C_loop: float
    C_excursion: float
    excursion_time: float  # sum_i m_i / (lam + i mu), kept for the conservation check


def boundary_quantities(p: ModelParams, tol: float = 1e-15) -> BoundaryQuantities:
    if not tol > 0:
        raise ValueError("tol must be positive")
    ns = n_star(p)
    lam, mu, h, c = p.lam, p.mu, p.h, p.c
    top = ns - 1
    # m_i grows until i ~ rho, so only stop once past that point
    onset = ns + p.rho + 10 * math.sqrt(p.rho + 1)
    m = [1.0]
    rate = lam + top * mu
    C_loop = (h * top + c) / rate
    time = 1.0 / rate
    i = top
    while True:
        if len(m) > M_SERIES_MAX_TERMS:
            raise ArithmeticError("visit-count series did not converge")
        ratio = lam / (lam + i * mu) * (lam + (i + 1) * mu) / ((i + 1) * mu)
        i += 1
        mi = m[-1] * ratio
        m.append(mi)
        term = mi * (h * i + c) / (lam + i * mu)
        C_loop += term
        time += mi / (lam + i * mu)
        if i > onset and term < tol * C_loop:
            break
    C_exc = (1 + top * mu / lam) * C_loop - (h * top + c) / lam
    return BoundaryQuantities(
        n_star=ns,
        T_top=t_between(p, top),
        m=np.array(m),
        C_loop=C_loop,
        C_excursion=C_exc,
        excursion_time=time,
    )


@dataclass(frozen=True)
class SmdpInstance:
    params: ModelParams
    n_star: int
    states: List[State]
    trans: Dict[Key, List[Tuple[State, float]]]
    sojourn: Dict[Key, float]
    cost: Dict[Key, float]
    boundary: BoundaryQuantities

    def index(self, s: State) -> int:
        return 2 * s.i + s.delta

    def rows(self):
        """``(state, action, next_state, prob, sojourn, cost)`` in state order."""
        for s in self.states:
            for a in (0, 1):
                for nxt, prob in self.trans[s, a]:
                    yield s, a, nxt, prob, self.sojourn[s, a], self.cost[s, a]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "delta", "action", "next_i", "next_delta", "prob", "sojourn", "cost"])
        for s, a, nxt, prob, tau, cost in self.rows():
            w.writerow([s.i, s.delta, a, nxt.i, nxt.delta, repr(prob), repr(tau), repr(cost)])
        return buf.getvalue()


def build_smdp(p: ModelParams, tol: float = 1e-15) -> SmdpInstance:
    validate_params(p)
    bq = boundary_quantities(p, tol)
    ns = bq.n_star
    lam, mu, h, c = p.lam, p.mu, p.h, p.c
    states = [State(i, d) for i in range(ns) for d in (0, 1)]
    trans: Dict[Key, List[Tuple[State, float]]] = {}
    sojourn: Dict[Key, float] = {}
    cost: Dict[Key, float] = {}
    switch = {0: p.s0, 1: p.s1}

    for i in range(ns - 1):
        rate = lam + i * mu
        for d in (0, 1):
            s = State(i, d)
            trans[s, 0] = [(State(i + 1, 0), 1.0)]
            sojourn[s, 0] = 1 / lam
            cost[s, 0] = (d != 0) * switch[0] + h * i / lam
            up = [(State(i + 1, 1), lam / rate)]
            down = [(State(i - 1, 1), i * mu / rate)] if i > 0 else []
            trans[s, 1] = up + down
            sojourn[s, 1] = 1 / rate
            cost[s, 1] = (d != 1) * switch[1] + (h * i + c) / rate

    top = ns - 1
    rate = lam + top * mu
    loop_time = lam / rate * (1 / lam + bq.T_top)
    off_cost = h * top / lam + p.s1 + bq.C_excursion
    for d in (0, 1):
        s = State(top, d)
        row = [(State(top, 1), lam / rate)]
        if top > 0:
            row.insert(0, (State(top - 1, 1), top * mu / rate))
        trans[s, 1] = row
        sojourn[s, 1] = loop_time
        cost[s, 1] = (1 - d) * p.s1 + bq.C_loop
        trans[s, 0] = [(State(top, 1), 1.0)]
        sojourn[s, 0] = 1 / lam + bq.T_top
        cost[s, 0] = d * p.s0 + off_cost

    return SmdpInstance(p, ns, states, trans, sojourn, cost, bq)
