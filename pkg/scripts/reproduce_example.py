"""Solve the reference instance every available way and print the numbers side by side."""
import time

from mminf_switching.closed_forms import best_zero_n
from mminf_switching.evaluate import evaluate_mn_exact, solve_discounted
from mminf_switching.lp import solve_average
from mminf_switching.model import MN, ModelParams
from mminf_switching.sim import SimConfig, simulate_policy

p = ModelParams(lam=2, mu=1, h=1, c=100, s0=100, s1=100)

t0 = time.perf_counter()
sol = solve_average(p)
print(f"LP:          {sol.policy}  v = {sol.v:.6f}  ({sol.lp.iterations} pivots, "
      f"{time.perf_counter() - t0:.3f} s)")

vals = {(M, N): evaluate_mn_exact(p, M, N) for M in range(10) for N in range(M + 1, 60)}
arg = min(vals, key=vals.get)
print(f"enumeration: ({arg[0]},{arg[1]})  v = {vals[arg]:.6f}")
for M, N in [(4, 38), (4, 39), (3, 38), (5, 39)]:
    print(f"   exact ({M},{N}) = {vals[M, N]:.6f}")

for pol in (MN(4, 38), MN(4, 39)):
    r = simulate_policy(p, pol, SimConfig(seed=1, horizon=100_000))
    print(f"simulation {pol}: {r.mean:.4f} +/- {r.half_width:.4f}")

N0, v0 = best_zero_n(p)
print(f"best (0,N):  N = {N0}  v = {v0:.6f}  gap = {v0 - sol.v:.4f}")

for alpha in (1e-1, 1e-2, 1e-3, 1e-4):
    d = solve_discounted(p, alpha)
    print(f"discounted alpha={alpha:g}: M* = {d.M_star}, N* = {d.N_star}, n_alpha = {d.n_alpha}")
