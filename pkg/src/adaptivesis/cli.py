"""Command line front end: simulate, sweep, cpef, qsd, theory."""

from __future__ import annotations

import argparse
import sys
from random import Random

from . import sweep as sweepmod
from .cpef import DEFAULT_NODE_CAP, estimate_meta_offspring, run_cpef
from .explore import run_exploration_trajectory
from .qsd import (default_truncation, flow_inequality_check, qsd_moments,
                  quasi_stationary, simulate_star_hitting_time,
                  star_generator)
from .randutil import derive_seed
from .simcore import DEFAULT_EVENT_BUDGET, Params, run_trajectory
from .theory import (critical_lambda_fast_updates, critical_lambda_forest,
                     critical_lambda_nonadaptive, critical_lambda_simple,
                     critical_lambda_small_product, evaluate_conditions)

THEORY_CURVE_COLUMNS = ("kappa", "lambda_small_product", "lambda_fast_updates",
                        "lambda_forest", "lambda_simple",
                        "lambda_nonadaptive")


def _fmt(x: float) -> str:
    return "%.17g" % x


def _add_rates(p, kappa=True):
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="per-edge transmission rate")
    p.add_argument("--beta", type=float, required=True,
                   help="mean degree of the background graph")
    if kappa:
        p.add_argument("--kappa", type=float, required=True,
                       help="neighborhood update rate")


def _cmd_simulate(args) -> int:
    params = Params(n=args.n, beta=args.beta, lam=args.lam, kappa=args.kappa,
                    epsilon=args.epsilon)
    epidemics = 0
    budget = 0
    ever_sum = 0
    time_sum = 0.0
    for rep in range(args.samples):
        rng = Random(derive_seed(args.seed, rep))
        if args.simulator == "exploration":
            if args.mode != "adaptive":
                raise ValueError("the exploration simulator is adaptive-only")
            stats = run_exploration_trajectory(params, rng=rng,
                                               max_events=args.event_budget)
        else:
            stats = run_trajectory(params, args.mode, rng=rng,
                                   max_events=args.event_budget)
        epidemics += stats.termination == "epidemic"
        budget += stats.termination == "budget_exceeded"
        ever_sum += stats.ever_infected
        time_sum += stats.time
    print(f"samples            {args.samples}")
    print(f"epidemics          {epidemics}")
    print(f"p_hat              {_fmt(epidemics / args.samples)}")
    print(f"mean_ever_infected {_fmt(ever_sum / args.samples)}")
    print(f"mean_time          {_fmt(time_sum / args.samples)}")
    print(f"budget_hits        {budget}")
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = sweepmod.parse_config(fh.read())
    progress = None
    if args.progress:
        def progress(done, total):
            print(f"cell {done}/{total}", file=sys.stderr, flush=True)
    results = sweepmod.run_sweep(config, progress=progress)
    sweepmod.emit_csv(results, config, args.out)
    print(f"wrote {len(results)} cells to {args.out}")
    return 0


def _cmd_cpef(args) -> int:
    rng = Random(args.seed)
    if args.forest:
        survived = 0
        ever = 0.0
        for _ in range(args.samples):
            out = run_cpef(args.lam, args.beta, args.kappa, rng,
                           total_infected_cap=args.total_cap,
                           max_hosts=args.meta_cap,
                           node_cap=args.node_cap,
                           max_events_per_host=args.event_budget)
            survived += out.termination == "budget_exceeded"
            ever += out.total_ever_infected
        print(f"samples            {args.samples}")
        print(f"survival_proxy     {_fmt(survived / args.samples)}")
        print(f"mean_total_ever    {_fmt(ever / args.samples)}")
    else:
        mean, stderr = estimate_meta_offspring(
            args.lam, args.beta, args.kappa, args.samples, rng,
            node_cap=args.node_cap, max_events_per_host=args.event_budget)
        print(f"samples            {args.samples}")
        print(f"meta_mean          {_fmt(mean)}")
        print(f"meta_stderr        {_fmt(stderr)}")
    return 0


def _cmd_qsd(args) -> int:
    trunc = args.truncation
    if trunc is None:
        trunc = default_truncation(args.beta_star)
    gen = star_generator(args.beta_star, args.kappa, args.lam, trunc)
    result = quasi_stationary(gen)
    moments = qsd_moments(result)
    print(f"truncation         {trunc}")
    print(f"rho                {_fmt(result.rho)}")
    print(f"iterations         {result.iterations}")
    print(f"residual           {_fmt(result.residual)}")
    print(f"degree_mean        {_fmt(moments.mean)}")
    print(f"degree_second      {_fmt(moments.second_moment)}")
    print(f"mean_bounded       {moments.mean_bounded}")
    print(f"second_bounded     {moments.second_bounded}")
    if args.cut is not None:
        ok, margin = flow_inequality_check(gen, result.alpha, args.cut)
        print(f"flow_margin@{args.cut}    {_fmt(margin)} ({'ok' if ok else 'violated'})")
    if args.hitting_samples:
        rng = Random(args.seed)
        total = 0.0
        for _ in range(args.hitting_samples):
            total += simulate_star_hitting_time(args.beta_star, args.kappa,
                                                args.lam, trunc,
                                                init=result.alpha, rng=rng)
        print(f"hitting_mean       {_fmt(total / args.hitting_samples)}")
        print(f"hitting_theory     {_fmt(1.0 / result.rho)}")
    return 0


def _write_theory_point_csv(report, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("key,value\n")
        for key, value in report.as_dict().items():
            if isinstance(value, bool):
                fh.write(f"{key},{int(value)}\n")
            elif value is None:
                fh.write(f"{key},\n")
            else:
                fh.write(f"{key},{_fmt(value)}\n")


def _cmd_theory(args) -> int:
    if args.kappa_grid is not None:
        kappas = sweepmod.parse_grid(args.kappa_grid)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# threshold curves at beta={_fmt(args.beta)}\n")
            fh.write(",".join(THEORY_CURVE_COLUMNS) + "\n")
            for kappa in kappas:
                row = (
                    kappa,
                    critical_lambda_small_product(args.beta),
                    critical_lambda_fast_updates(args.beta, kappa),
                    critical_lambda_forest(args.beta, kappa),
                    critical_lambda_simple(args.beta, kappa),
                    critical_lambda_nonadaptive(args.beta),
                )
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        print(f"wrote {len(kappas)} rows to {args.out}")
        return 0
    if args.lam is None or args.kappa is None:
        raise ValueError("point mode needs --lambda and --kappa")
    report = evaluate_conditions(args.lam, args.beta, args.kappa)
    for key, value in report.as_dict().items():
        if isinstance(value, float):
            value = _fmt(value)
        print(f"{key:<28}{value}")
    if args.csv is not None:
        _write_theory_point_csv(report, args.csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptivesis",
        description="SIS epidemics on dynamic graphs with "
                    "infection-adaptive updating")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="finite-population trajectories")
    _add_rates(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.05,
                   help="epidemic threshold as a fraction of n")
    p.add_argument("--mode", choices=("adaptive", "nonadaptive"),
                   default="adaptive")
    p.add_argument("--simulator", choices=("direct", "exploration"),
                   default="direct")
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--event-budget", type=int, default=DEFAULT_EVENT_BUDGET)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="grid sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("cpef", help="forest model: meta offspring or survival")
    _add_rates(p)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--forest", action="store_true",
                   help="run whole forests instead of single hosts")
    p.add_argument("--total-cap", type=int, default=10**4)
    p.add_argument("--meta-cap", type=int, default=10**4)
    p.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    p.add_argument("--event-budget", type=int, default=10**8)
    p.set_defaults(func=_cmd_cpef)

    p = sub.add_parser("qsd", help="star-neighborhood quasi-stationary law")
    p.add_argument("--beta-star", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--cut", type=int, default=None,
                   help="check the flow inequality across this degree")
    p.add_argument("--hitting-samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_qsd)

    p = sub.add_parser("theory", help="closed-form conditions and curves")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--csv", default=None,
                   help="also write the point report as key,value CSV")
    p.add_argument("--kappa-grid", default=None,
                   help="emit threshold curves over this kappa grid")
    p.add_argument("--out", default=None,
                   help="output path for --kappa-grid")
    p.set_defaults(func=_cmd_theory)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "theory" and args.kappa_grid is not None \
            and args.out is None:
        parser.error("--kappa-grid needs --out")
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
