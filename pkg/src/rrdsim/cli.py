"""Command line: ``rrdsim simulate | validate | plot``.

Exit codes: 0 success, 1 validation error, 2 run failure.
"""
import argparse
import os
import sys

from .scenario import ScenarioError, banner, load_scenario, parse_densities, parse_mode, validate
from .sweep import SweepError, emit_plots, read_csv, run_sweep

EXIT_OK, EXIT_INVALID, EXIT_RUN = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="rrdsim", description="802.11 RTS duration-attack simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a density sweep and write CSV + plot scripts")
    s.add_argument("scenario")
    s.add_argument("--densities", help="e.g. 2..25 or 5,10,25")
    s.add_argument("--modes", help="comma list, e.g. no-attack,attack-undefended,attack-phase2")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", default="results")
    s.add_argument("--replications", type=int)
    s.add_argument("--run-seconds", type=float)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--allow-density-override", action="store_true")
    s.add_argument("--quiet", action="store_true")

    v = sub.add_parser("validate", help="check a scenario file and print its parameters")
    v.add_argument("scenario")

    pl = sub.add_parser("plot", help="write plot scripts for an existing results CSV")
    pl.add_argument("csv")
    pl.add_argument("--out", required=True)
    return p


def _load(args):
    sc = load_scenario(args.scenario)
    if getattr(args, "allow_density_override", False):
        sc = sc.replace("scenario", allow_density_override=True)
    if getattr(args, "run_seconds", None) is not None:
        sc = sc.replace("scenario", run_seconds=args.run_seconds)
    if getattr(args, "densities", None):
        try:
            sc = sc.replace("sweep", densities=parse_densities(args.densities))
        except ValueError as e:
            raise ScenarioError(f"--densities: {e}") from None
    if getattr(args, "modes", None):
        modes = tuple(m.strip() for m in args.modes.split(",") if m.strip())
        for m in modes:
            try:
                parse_mode(m)
            except ValueError as e:
                raise ScenarioError(f"--modes: {e}") from None
        sc = sc.replace("sweep", modes=modes)
    return validate(sc)


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "plot":
        try:
            sweep = read_csv(args.csv)
            paths = emit_plots(sweep, args.out, csv_path=os.path.abspath(args.csv))
        except (OSError, ValueError) as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INVALID
        print("\n".join(paths))
        return EXIT_OK

    try:
        sc = _load(args)
    except ScenarioError as e:
        print(f"invalid scenario: {e}", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "validate":
        print(banner(sc))
        print("ok")
        return EXIT_OK

    if not args.quiet:
        print(banner(sc), file=sys.stderr)

    def progress(row):
        if not args.quiet:
            print(f"n={row.node_count:2d} {row.defense_mode:20s} rep={row.replication} "
                  f"thr={row.throughput_bps:10.0f} bps", file=sys.stderr)

    try:
        sweep = run_sweep(sc, replications=args.replications, seed=args.seed, jobs=args.jobs,
                          progress=progress)
    except SweepError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUN
    results = sweep.write(args.out)
    emit_plots(sweep, args.out, csv_path="results.csv")
    print(results)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
