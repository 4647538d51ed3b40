"""Command line entry point.

Subcommands:
  run             run one scenario and write <name>.csv + meta.json
  validate        run the physics/statistics self-checks
  list-scenarios  show the builtin sweeps

Exit codes: 0 on success, 1 when validation fails, 2 for unusable configs
or arguments.
"""

import argparse
import dataclasses
import sys

from .experiments import (
    ConfigError,
    builtin_scenarios,
    resolve_scenario,
    run_scenario_to_dir,
    validate,
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ris-emi",
        description="Monte Carlo SNR sweeps for RIS links under EMI.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario sweep")
    run_p.add_argument(
        "--scenario",
        required=True,
        help="builtin scenario name or path to a JSON config",
    )
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override master seed")
    run_p.add_argument(
        "--trials", type=int, default=None, help="override trial count"
    )
    run_p.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker threads for independent sweep cells",
    )
    run_p.add_argument(
        "--timing",
        action="store_true",
        help="record wall times in the CSV (breaks byte-identical reruns)",
    )

    val_p = sub.add_parser("validate", help="run the self-check suite")
    val_p.add_argument(
        "--quick", action="store_true", help="reduced sizes, seconds not minutes"
    )
    val_p.add_argument(
        "--trials",
        type=int,
        default=None,
        help="override Monte Carlo trials per statistical check",
    )
    val_p.add_argument(
        "--draws",
        type=int,
        default=None,
        help="override sample count for the covariance check",
    )

    sub.add_parser("list-scenarios", help="list builtin scenarios")
    return parser


def _cmd_run(args):
    try:
        spec = resolve_scenario(args.scenario)
        if args.seed is not None:
            spec = dataclasses.replace(spec, master_seed=args.seed)
        if args.trials is not None:
            spec = dataclasses.replace(spec, n_trials=args.trials)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows, csv_path = run_scenario_to_dir(
        spec, args.out, timing=args.timing, threads=args.threads
    )
    bad = [r for r in rows if r.error is not None]
    print(f"wrote {len(rows)} rows to {csv_path}")
    if bad:
        print(
            f"warning: {len(bad)} rows carry an error flag "
            f"(see meta.json): {bad[0].error}",
            file=sys.stderr,
        )
    return 0


def _cmd_validate(args):
    if (args.trials is not None and args.trials < 1) or (
        args.draws is not None and args.draws < 1
    ):
        print("error: --trials/--draws must be positive", file=sys.stderr)
        return 2
    report = validate(quick=args.quick, trials=args.trials, draws=args.draws)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def _cmd_list():
    for name, spec in builtin_scenarios().items():
        strategies = ", ".join(spec.strategies)
        print(f"{name}: N={list(spec.n_sweep)}, strategies [{strategies}]")
        print(f"    {spec.description}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_list()


if __name__ == "__main__":
    sys.exit(main())
