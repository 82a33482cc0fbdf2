"""How much the optimal (M,N)-policy saves over the best (0,N)-policy across switching costs."""
import argparse

from mminf_switching.cli import render, sweep_params, sweep_row

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--lam", type=float, default=2.0)
ap.add_argument("--c", type=float, default=100.0)
ap.add_argument("--costs", default="1,10,50,100,200,500")
ap.add_argument("--format", default="table", choices=("table", "csv", "json"))
args = ap.parse_args()

base = dict(lam=args.lam, mu=1.0, h=1.0, c=args.c, s0=0.0, s1=0.0)
costs = [float(x) for x in args.costs.split(",")]
rows = [sweep_row(p) for p in sweep_params(base, {"s0": costs, "s1": costs})]
keep = ("s0", "s1", "policy", "v", "N_best0N", "v_best0N", "gap")
print(render([{k: r[k] for k in keep} for r in rows], args.format), end="")
