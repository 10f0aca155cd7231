"""Command-line entry point: ``swarmsearch run | sweep | alpha``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .bench import ExperimentSpec, StrategyOptions, export_results, load_experiment_spec, run_experiment
from .engine import SimConfig
from .errors import SwarmSearchError
from .levy_theory import SearchGeometry, mean_flights, optimal_alpha, optimal_beta
from .potential_field import PotentialParams
from .stochastic import LevyParams
from .world import load_scenario


def _print_table(stats) -> None:
    spec = stats.spec
    print(f"{'strategy':<8} {spec.sweep_variable:>8} {'trials':>6} {'mean':>10} {'std':>10} "
          f"{'median':>10} {'censored':>8}")
    for (strategy, value), c in stats.cells.items():
        print(f"{strategy:<8} {value:>8d} {c.trials:>6d} {c.mean:>10.2f} {c.std:>10.2f} "
              f"{c.median:>10.2f} {c.censored:>8d}")


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario) if args.scenario else None
    base = SimConfig(master_seed=args.seed, dt=args.dt, t_max=args.t_max, scenario=scenario)
    options = StrategyOptions(
        levy=LevyParams(args.alpha, args.gamma),
        fixed_duration=args.fixed_duration,
        potential=PotentialParams(args.krep, args.rho0),
        k=args.k,
        sigma_omega=args.sigma_omega,
    )
    spec = ExperimentSpec((args.strategy,), "robots", (args.robots,), args.targets,
                          trials=args.trials, base=base, options=options, output=args.out)
    out = Path(args.out)
    stats = run_experiment(spec, workers=args.workers,
                           event_dir=out if args.log_events else None)
    files = export_results(stats, out)
    _print_table(stats)
    print(f"wrote {', '.join(str(p) for p in files.values())}")
    return 0


def cmd_sweep(args) -> int:
    spec = load_experiment_spec(args.spec)
    out = args.out or spec.output
    if not out:
        raise SwarmSearchError("no output directory: pass --out or set 'output' in the experiment file")
    stats = run_experiment(spec, workers=args.workers)
    files = export_results(stats, out)
    _print_table(stats)
    print(f"wrote {', '.join(str(p) for p in files.values())}")
    return 0


def cmd_alpha(args) -> int:
    geom = SearchGeometry(args.lam, args.rv)
    print(f"lambda/r_v      = {geom.ratio:.6g}")
    beta = optimal_beta(geom)
    alpha = optimal_alpha(geom)
    print(f"beta            = {beta:.6g}")
    print(f"optimal alpha   = {alpha:.6g}")
    if 0.0 < alpha <= 2.0:
        print(f"mean flights N  = {mean_flights(geom, alpha):.6g}  (at optimal alpha)")
    else:
        print("mean flights N  = undefined (optimal alpha outside (0, 2])")
    if args.alpha is not None:
        print(f"mean flights N  = {mean_flights(geom, args.alpha):.6g}  (at alpha={args.alpha})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swarmsearch", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run trials of one strategy")
    run.add_argument("--scenario", help="scenario JSON file (default: random per trial)")
    run.add_argument("--strategy", required=True, choices=["fixed", "levy", "levy+pf"])
    run.add_argument("--robots", type=int, default=10)
    run.add_argument("--targets", type=int, default=8)
    run.add_argument("--trials", type=int, default=20)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--dt", type=float, default=0.05)
    run.add_argument("--t-max", type=float, default=20_000.0)
    run.add_argument("--alpha", type=float, default=2.0)
    run.add_argument("--gamma", type=float, default=1.0)
    run.add_argument("--k", type=float, default=0.6, help="linear speed, m/s")
    run.add_argument("--krep", type=float, default=1.0)
    run.add_argument("--rho0", type=float, default=1.0)
    run.add_argument("--fixed-duration", type=float, default=1.5)
    run.add_argument("--sigma-omega", type=float, default=math.pi)
    run.add_argument("--out", required=True)
    run.add_argument("--log-events", action="store_true")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run an experiment document")
    sweep.add_argument("--spec", required=True)
    sweep.add_argument("--out")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)

    alpha = sub.add_parser("alpha", help="optimal Levy exponent for a search geometry")
    alpha.add_argument("--lambda", dest="lam", type=float, required=True)
    alpha.add_argument("--rv", type=float, required=True)
    alpha.add_argument("--alpha", type=float)
    alpha.set_defaults(func=cmd_alpha)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SwarmSearchError, OSError) as exc:
        print(f"swarmsearch: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
