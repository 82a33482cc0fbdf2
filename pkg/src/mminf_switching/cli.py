"""Command-line front end.

Exit codes: 0 success, 1 a ``reproduce-example`` check failed,
2 invalid input, 3 solver failure.

Parameters come from a flat JSON config (``--config``, or the file named by
``$MMINF_SWITCHING_CONFIG``) and are overridden by flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, List

from .closed_forms import best_zero_n, n_tilde
from .evaluate import (TruncationError, evaluate_mn_exact, evaluate_policy_exact,
                       solve_discounted)
from .lp import LpError, assemble_lp, extract_policy, solve_average, solve_lp
from .model import MN, ModelParams, ValidationError, parse_policy, validate_params
from .sim import SimConfig, simulate_policy
from .simplex import SimplexError
from .smdp import build_smdp

CONFIG_ENV = "MMINF_SWITCHING_CONFIG"
PARAM_FLAGS = {"lambda": "lam", "mu": "mu", "h": "h", "c": "c", "s0": "s0", "s1": "s1"}
REFERENCE_INSTANCE = dict(lam=2.0, mu=1.0, h=1.0, c=100.0, s0=100.0, s1=100.0)

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def render(rows: List[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_cell(r.get(k)) for k in cols] for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows(cells)
        return buf.getvalue()
    widths = [max(len(c), *(len(row[j]) for row in cells)) for j, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}", field="config") from exc
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object", field="config")
    return cfg


def _merged(args, cfg: dict, key: str, default=None):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return cfg.get(key, default)


def _params(args, cfg: dict) -> ModelParams:
    d = {}
    for flag, name in PARAM_FLAGS.items():
        v = getattr(args, name, None)
        if v is None:
            v = cfg.get(flag, cfg.get(name))
        if v is not None:
            d[name] = v
    return validate_params(ModelParams.from_dict(d))


def _param_cols(p: ModelParams) -> dict:
    return {"lambda": p.lam, "mu": p.mu, "h": p.h, "c": p.c, "s0": p.s0, "s1": p.s1}


def _policy_cols(pol) -> dict:
    if isinstance(pol, MN):
        return {"policy": str(pol), "M": pol.M, "N": pol.N}
    return {"policy": str(pol), "M": None, "N": None}


def cmd_solve(args, cfg) -> List[dict]:
    p = _params(args, cfg)
    t0 = time.perf_counter()
    s = build_smdp(p)
    lp = assemble_lp(s)
    if args.dump_smdp:
        with open(args.dump_smdp, "w") as fh:
            fh.write(s.to_csv())
    if args.dump_lp:
        with open(args.dump_lp, "w") as fh:
            fh.write(lp.to_lp_format())
    sol = extract_policy(solve_lp(lp), s)
    elapsed = time.perf_counter() - t0
    row = {**_policy_cols(sol.policy), "v": sol.v, "v_exact": evaluate_policy_exact(p, sol.policy),
           "n_star": sol.n_star, "case": sol.case, "note": sol.note,
           "lp_iterations": sol.lp.iterations, "lp_residual": sol.lp.max_residual,
           "bland": sol.lp.bland_engaged}
    if args.timing:
        row["seconds"] = elapsed
    return [row]


def cmd_best0n(args, cfg) -> List[dict]:
    p = _params(args, cfg)
    N, v = best_zero_n(p)
    return [{"N": N, "v": v, "n_tilde": n_tilde(p)}]


def _policy_arg(args, cfg):
    text = _merged(args, cfg, "policy")
    if text is None:
        raise ValidationError("missing parameter: policy", field="policy")
    return parse_policy(str(text))


def cmd_evaluate(args, cfg) -> List[dict]:
    p = _params(args, cfg)
    pol = _policy_arg(args, cfg)
    return [{**_policy_cols(pol), "v": evaluate_policy_exact(p, pol)}]


def _sim_config(args, cfg) -> SimConfig:
    unit = _merged(args, cfg, "unit", "cycles")
    try:
        return SimConfig(seed=int(_merged(args, cfg, "seed", 0)),
                         horizon=float(_merged(args, cfg, "horizon", 10_000)),
                         unit=unit,
                         warmup=float(_merged(args, cfg, "warmup", 0.0)),
                         replications=int(_merged(args, cfg, "replications", 1)))
    except ValueError as exc:
        raise ValidationError(str(exc), field="sim") from exc


def cmd_simulate(args, cfg) -> List[dict]:
    p = _params(args, cfg)
    pol = _policy_arg(args, cfg)
    sc = _sim_config(args, cfg)
    if not isinstance(pol, MN) and sc.unit == "cycles":
        raise ValidationError("non-(M,N) policies need --unit time", field="unit")
    rep = simulate_policy(p, pol, sc)
    if rep.warning:
        print(f"warning: {rep.warning}", file=sys.stderr)
    return [{**_policy_cols(pol), **rep.to_row()}]


def cmd_discounted(args, cfg) -> List[dict]:
    p = _params(args, cfg)
    alpha = _merged(args, cfg, "alpha")
    if alpha is None:
        raise ValidationError("missing parameter: alpha", field="alpha")
    sol = solve_discounted(p, float(alpha), method=_merged(args, cfg, "method", "policy"))
    if args.dump_values:
        with open(args.dump_values, "w") as fh:
            fh.write(sol.to_csv())
    return [{"alpha": sol.alpha, "M_star": sol.M_star, "N_star": sol.N_star,
             "n_alpha": sol.n_alpha, "L": sol.L, "iterations": sol.iterations,
             "residual": sol.residual}]


def sweep_row(p: ModelParams) -> dict:
    sol = solve_average(p)
    N0, v0 = best_zero_n(p)
    return {**_param_cols(p), **_policy_cols(sol.policy), "v": sol.v,
            "N_best0N": N0, "v_best0N": v0, "gap": v0 - sol.v}


def _grid(args, cfg) -> dict:
    grid = dict(cfg.get("grid", {}))
    for spec in args.grid or []:
        key, _, values = spec.partition("=")
        key = key.strip()
        if key not in PARAM_FLAGS and key not in PARAM_FLAGS.values() or not values:
            raise ValidationError(f"bad grid spec {spec!r}; use name=v1,v2,...", field="grid")
        grid[key] = [float(v) for v in values.split(",")]
    return grid


def sweep_params(base: dict, grid: dict) -> Iterable[ModelParams]:
    keys = list(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        d = dict(base)
        for k, v in zip(keys, combo):
            d[PARAM_FLAGS.get(k, k)] = v
        yield validate_params(ModelParams.from_dict(d))


def cmd_sweep(args, cfg) -> List[dict]:
    base = {}
    for flag, name in PARAM_FLAGS.items():
        v = getattr(args, name, None)
        if v is None:
            v = cfg.get(flag, cfg.get(name))
        if v is not None:
            base[name] = float(v)
    grid = _grid(args, cfg)
    if not grid:
        raise ValidationError("sweep needs at least one --grid name=values", field="grid")
    points = list(sweep_params(base, grid))
    jobs = int(_merged(args, cfg, "jobs", 1))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(sweep_row, points))
    return [sweep_row(p) for p in points]


def reproduce_example(timing: bool = False) -> tuple[List[dict], bool]:
    """Re-run the reference instance and check the acceptance tolerances.

    Runtimes are always checked but only shown with ``timing`` so that the
    output is otherwise reproducible byte for byte.
    """
    p = ModelParams(**REFERENCE_INSTANCE)
    rows = []

    def check(name, value, ok, target):
        rows.append({"check": name, "value": value, "target": target, "pass": bool(ok)})

    t0 = time.perf_counter()
    sol = solve_average(p)
    t_lp = time.perf_counter() - t0
    pol = sol.policy
    is_mn = isinstance(pol, MN)
    check("lp M", pol.M if is_mn else None, is_mn and pol.M == 4, "4")
    check("lp N", pol.N if is_mn else None, is_mn and pol.N in (38, 39), "38 or 39")
    check("lp v", sol.v, 43.29 <= sol.v <= 43.49, "[43.29, 43.49]")
    exact = {N: evaluate_mn_exact(p, 4, N) for N in (38, 39)}
    best = min(exact, key=exact.get)
    check("exact minimiser N", best, is_mn and best == pol.N, "matches lp N")
    rel = abs(sol.v - exact[best]) / exact[best]
    check("lp vs exact rel. error", rel, rel <= 1e-6, "<= 1e-6")
    check("lp runtime s", t_lp if timing else None, t_lp < 5, "< 5")
    t0 = time.perf_counter()
    N0, v0 = best_zero_n(p)
    t_0n = time.perf_counter() - t0
    check("best (0,N) N", N0, N0 == 47, "47")
    check("best (0,N) v", v0, 50.93 <= v0 <= 51.13, "[50.93, 51.13]")
    check("best (0,N) runtime s", t_0n if timing else None, t_0n < 1, "< 1")
    check("gap v(0,N*) - v", v0 - sol.v, v0 - sol.v >= 7.0, ">= 7.0")
    return rows, all(r["pass"] for r in rows)


def cmd_reproduce(args, cfg) -> List[dict]:
    rows, ok = reproduce_example(timing=args.timing)
    args._exit = EXIT_OK if ok else EXIT_CHECK
    return rows


def _add_params(sp):
    g = sp.add_argument_group("model parameters")
    g.add_argument("--lambda", dest="lam", type=float, help="arrival rate")
    g.add_argument("--mu", type=float, help="service rate per server")
    g.add_argument("--h", type=float, help="holding cost rate per customer")
    g.add_argument("--c", type=float, help="running cost rate")
    g.add_argument("--s0", type=float, help="switch-off cost")
    g.add_argument("--s1", type=float, help="switch-on cost")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mminf-switching",
                                 description="On/off control of an M/M/inf queue.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    common.add_argument("--format", choices=("table", "csv", "json"), default=None)
    common.add_argument("--output", help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", parents=[common], help="average-optimal policy via the LP")
    _add_params(sp)
    sp.add_argument("--dump-smdp", help="write the SMDP rows as CSV")
    sp.add_argument("--dump-lp", help="write the LP in CPLEX LP format")
    sp.add_argument("--timing", action="store_true", help="report wall-clock seconds")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("best0n", parents=[common], help="best (0,N)-policy")
    _add_params(sp)
    sp.set_defaults(func=cmd_best0n)

    sp = sub.add_parser("evaluate", parents=[common], help="exact average cost of a policy")
    _add_params(sp)
    sp.add_argument("--policy", help='"M,N" or "full[:n]"')
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("simulate", parents=[common], help="simulate a policy")
    _add_params(sp)
    sp.add_argument("--policy", help='"M,N" or "full[:n]"')
    sp.add_argument("--seed", type=int)
    sp.add_argument("--horizon", type=float, help="cycles or time units, see --unit")
    sp.add_argument("--unit", choices=("cycles", "time"))
    sp.add_argument("--warmup", type=float)
    sp.add_argument("--replications", type=int)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("discounted", parents=[common], help="discount-optimal thresholds")
    _add_params(sp)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--method", choices=("policy", "value"))
    sp.add_argument("--dump-values", help="write the value table as CSV")
    sp.set_defaults(func=cmd_discounted)

    sp = sub.add_parser("sweep", parents=[common], help="optimal vs best (0,N) over a grid")
    _add_params(sp)
    sp.add_argument("--grid", action="append", metavar="NAME=V1,V2,...")
    sp.add_argument("--jobs", type=int)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reproduce-example", parents=[common],
                        help="re-run the reference instance and check it")
    sp.add_argument("--timing", action="store_true", help="show measured runtimes")
    sp.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args._exit = EXIT_OK
    try:
        cfg = _load_config(args.config)
        rows = args.func(args, cfg)
    except ValidationError as exc:
        field = f" [{exc.field}]" if exc.field else ""
        print(f"error{field}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LpError, SimplexError, TruncationError, ArithmeticError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    fmt = args.format or cfg.get("format", "table")
    text = render(rows, fmt)
    out = args.output or cfg.get("output")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return args._exit


if __name__ == "__main__":
    sys.exit(main())
