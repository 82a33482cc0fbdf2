"""Discrete-event simulation of the controlled M/M/inf queue.

Random numbers come from numpy's Philox4x32-10 counter-based generator,
keyed by ``seed + replication``. Exponential variates use the inverse
transform ``-log(1 - U) / rate``. The event loop is compiled with numba.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from numba import njit
from scipy import stats

from .model import MN, ModelParams, StationaryPolicy, action_arrays

MIN_CYCLES = 10
N_BATCHES = 20


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    horizon: float = 10_000
    unit: str = "cycles"  # "cycles" or "time"
    warmup: float = 0.0
    replications: int = 1

    def __post_init__(self):
        if self.unit not in ("cycles", "time"):
            raise ValueError(f"unit must be 'cycles' or 'time', got {self.unit!r}")
        if not (self.horizon > self.warmup >= 0):
            raise ValueError("need horizon > warmup >= 0")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class SimReport:
    mean: float
    half_width: float
    holding: float
    running: float
    switching: float
    cycles: int
    seed: int
    replications: int
    estimator: str
    sim_time: float
    warning: Optional[str] = None

    def covers(self, value: float) -> bool:
        return abs(self.mean - value) <= self.half_width

    def to_row(self) -> dict:
        return asdict(self)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))


@njit(cache=True)
def _run(rng, lam, mu, h, c, s0, s1, on_act, off_act, i, d,
         regen_on_switch, max_cycles, t_end, edges):
    """Simulate until ``max_cycles`` complete cycles or time ``t_end``.

    Returns per-cycle rows ``(start, holding, running, switching, length)``,
    per-batch sums ``(holding, running, switching)`` over the windows
    ``edges[k]..edges[k+1]``, the number of switch-on events, the number of
    entries into the empty running state, and the final time.
    """
    cutoff = on_act.shape[0]
    cap = 1024
    cyc = np.empty((cap, 5))
    n_cyc = 0
    nb = edges.shape[0] - 1
    batch = np.zeros((max(nb, 0), 3))
    t = 0.0
    started = False
    c_start = 0.0
    ch = 0.0
    cr = 0.0
    cs = 0.0
    n_on = 0
    n_empty = 0
    while True:
        if i < cutoff:
            a = on_act[i] if d == 1 else off_act[i]
        else:
            a = 1
        if a != d:
            cost = s1 if a == 1 else s0
            if a == 1:
                n_on += 1
                if regen_on_switch:
                    if started:
                        if n_cyc == cap:
                            bigger = np.empty((2 * cap, 5))
                            bigger[:cap] = cyc
                            cyc = bigger
                            cap *= 2
                        cyc[n_cyc, 0] = c_start
                        cyc[n_cyc, 1] = ch
                        cyc[n_cyc, 2] = cr
                        cyc[n_cyc, 3] = cs
                        cyc[n_cyc, 4] = t - c_start
                        n_cyc += 1
                        if n_cyc >= max_cycles:
                            break
                    started = True
                    c_start = t
                    ch = 0.0
                    cr = 0.0
                    cs = 0.0
            cs += cost
            for k in range(nb):
                if edges[k] <= t < edges[k + 1]:
                    batch[k, 2] += cost
            d = a
        if t >= t_end:
            break
        if d == 1:
            rate = lam + i * mu
        else:
            rate = lam
        dt = -math.log(1.0 - rng.random()) / rate
        hold = h * i
        run = c if d == 1 else 0.0
        ch += hold * dt
        cr += run * dt
        t1 = t + dt
        for k in range(nb):
            lo = max(t, edges[k])
            hi = min(t1, edges[k + 1])
            if hi > lo:
                batch[k, 0] += hold * (hi - lo)
                batch[k, 1] += run * (hi - lo)
        t = t1
        if d == 0 or rng.random() * rate < lam:
            i += 1
        else:
            i -= 1
            if i == 0:
                n_empty += 1
    return cyc[:n_cyc], batch, n_on, n_empty, t


def _policy_arrays(p: ModelParams, pol: StationaryPolicy):
    # beyond the cutoff every policy runs, as the kernel assumes
    size = max(pol.cutoff, 1) + 1
    on, off = action_arrays(pol, size)
    return np.array(on, dtype=np.int64), np.array(off, dtype=np.int64)


def _t_halfwidth(x: np.ndarray, level: float = 0.95) -> float:
    n = x.size
    if n < 2:
        return math.nan
    return float(stats.t.ppf(0.5 + level / 2, n - 1) * x.std(ddof=1) / math.sqrt(n))


def simulate_policy(p: ModelParams, pol: StationaryPolicy, cfg: SimConfig) -> SimReport:
    """Estimate the long-run average cost of ``pol`` by simulation.

    (M,N)-policies use the regenerative estimator with cycles delimited by
    switch-on epochs, starting at ``(N, 0)``. Other policies start empty and
    running and use a time average after ``warmup``, with a confidence
    interval from replications, or from batch means when there is one run.
    """
    on, off = _policy_arrays(p, pol)
    args = (p.lam, p.mu, p.h, p.c, p.s0, p.s1, on, off)
    z = float(stats.norm.ppf(0.975))

    if isinstance(pol, MN):
        rows = []
        total_time = 0.0
        for rep in range(cfg.replications):
            if cfg.unit == "cycles":
                max_c = int(cfg.horizon)
                t_end = math.inf
            else:
                max_c = 2**62
                t_end = cfg.horizon
            cyc, _, _, _, t = _run(_rng(cfg.seed + rep), *args, pol.N, 0, True, max_c, t_end,
                                   np.empty(0))
            if cfg.unit == "cycles":
                cyc = cyc[int(cfg.warmup):]
            else:
                cyc = cyc[cyc[:, 0] >= cfg.warmup]
            rows.append(cyc)
            total_time += t
        cyc = np.vstack(rows)
        n = cyc.shape[0]
        H, R, S, T = (cyc[:, k].sum() for k in (1, 2, 3, 4))
        if n == 0 or T == 0:
            return SimReport(math.nan, math.nan, math.nan, math.nan, math.nan, 0, cfg.seed,
                             cfg.replications, "regenerative", total_time,
                             "no complete regeneration cycle observed")
        mean = (H + R + S) / T
        if n >= 2:
            resid = cyc[:, 1] + cyc[:, 2] + cyc[:, 3] - mean * cyc[:, 4]
            hw = z * resid.std(ddof=1) / (cyc[:, 4].mean() * math.sqrt(n))
        else:
            hw = math.nan
        warn = None if n >= MIN_CYCLES else f"only {n} regeneration cycles observed"
        return SimReport(float(mean), float(hw), float(H / T), float(R / T), float(S / T), n,
                         cfg.seed, cfg.replications, "regenerative", float(total_time), warn)

    if cfg.unit != "time":
        raise ValueError("policies other than (M,N) need a time horizon (unit='time')")
    edges = np.linspace(cfg.warmup, cfg.horizon, N_BATCHES + 1)
    span = cfg.horizon - cfg.warmup
    per_rep = []
    batches = None
    cycles = 0
    for rep in range(cfg.replications):
        _, batch, n_on, n_empty, _ = _run(_rng(cfg.seed + rep), *args, 0, 1, False, 2**62,
                                          cfg.horizon, edges)
        per_rep.append(batch.sum(axis=0) / span)
        batches = batch / (span / N_BATCHES)
        cycles += n_on if n_on > 0 else n_empty
    comp = np.mean(per_rep, axis=0)
    if cfg.replications > 1:
        hw = _t_halfwidth(np.array([r.sum() for r in per_rep]))
        est = "replications"
    else:
        hw = _t_halfwidth(batches.sum(axis=1))
        est = "batch-means"
    warn = None if cycles >= MIN_CYCLES else f"only {cycles} regeneration cycles observed"
    return SimReport(float(comp.sum()), hw, float(comp[0]), float(comp[1]), float(comp[2]),
                     int(cycles), cfg.seed, cfg.replications, est,
                     cfg.horizon * cfg.replications, warn)


@njit(cache=True)
def _busy(rng, lam, mu, i0, reps):
    out = np.empty(reps)
    for r in range(reps):
        i = i0
        t = 0.0
        while i > 0:
            rate = lam + i * mu
            t += -math.log(1.0 - rng.random()) / rate
            if rng.random() * rate < lam:
                i += 1
            else:
                i -= 1
        out[r] = t
    return out


def simulate_busy_period(p: ModelParams, i0: int, reps: int, seed: int = 0):
    """Mean time for the all-on queue to empty from ``i0`` customers, with a 95% CI half-width."""
    if i0 < 1:
        raise ValueError("i0 must be >= 1")
    x = _busy(_rng(seed), p.lam, p.mu, i0, reps)
    return float(x.mean()), _t_halfwidth(x)
