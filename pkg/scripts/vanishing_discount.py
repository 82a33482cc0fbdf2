"""Discount-optimal thresholds as alpha shrinks, next to the average-optimal policy."""
import argparse

import numpy as np

from mminf_switching.evaluate import solve_discounted
from mminf_switching.lp import solve_average
from mminf_switching.model import ModelParams

ap = argparse.ArgumentParser(description=__doc__)
for name, default in [("lam", 2), ("mu", 1), ("h", 1), ("c", 100), ("s0", 100), ("s1", 100)]:
    ap.add_argument(f"--{name}", type=float, default=default)
args = ap.parse_args()

p = ModelParams(args.lam, args.mu, args.h, args.c, args.s0, args.s1)
avg = solve_average(p)
print(f"average-optimal: {avg.policy}, v = {avg.v:.6f}")
print(f"{'alpha':>8} {'M*':>4} {'N*':>4} {'n_alpha':>8} {'alpha*V(0,0)':>14}")
for alpha in np.logspace(0, -5, 11):
    d = solve_discounted(p, float(alpha))
    print(f"{alpha:8.1e} {d.M_star:4d} {d.N_star:4d} {d.n_alpha:8d} {alpha * d.V[0, 0]:14.6f}")
