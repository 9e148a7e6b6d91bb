"""
Run module for DT-IRS-Bench.

Command-line entry point: runs one scheme on one seeded scenario, or a sweep
when --sweep is given.
"""

import argparse
import logging
import sys

from dtirs_bench.src.config import load_config
from dtirs_bench.src.experiment import EXIT_CONFIG, EXIT_OK, run_experiment
from dtirs_bench.src.utils import ConfigError, Scheme, set_global_seed
from dtirs_bench.sweep import axes, parse_values, run_sweep


def main(argv: list[str] | None = None) -> int:
    """
    Parse arguments, run, and return the process exit status.

    Exit statuses: 0 success, 2 infeasible result, 3 invalid config or
    arguments, 4 solver failure.
    """
    parser = argparse.ArgumentParser(
        description=(
            "Minimize split-learning delay with digital-twin backup and an IRS, or"
            " run one of the baseline schemes"
        )
    )
    parser.add_argument("--config", type=str, default=None, help="scenario TOML file")
    parser.add_argument(
        "--scheme",
        type=str,
        default="proposed",
        choices=[s.cli_name for s in Scheme],
        help="scheme to run",
    )
    parser.add_argument("--seed", type=int, default=0, help="scenario seed")
    parser.add_argument("--iters", type=int, default=None, help="outer iteration cap")
    parser.add_argument("--out", type=str, required=True, help="output directory")
    parser.add_argument(
        "--sweep", type=str, default=None, choices=list(axes), help="swept field"
    )
    parser.add_argument(
        "--values", type=str, default="", help="comma-separated sweep values"
    )
    parser.add_argument(
        "--seeds", type=str, default="", help="comma-separated sweep seeds"
    )
    parser.add_argument(
        "--schemes", type=str, default="", help="comma-separated sweep schemes"
    )
    parser.add_argument(
        "--num_workers", type=int, default=0, help="sweep worker processes"
    )
    parser.add_argument(
        "--tb_dir", type=str, default=None, help="TensorBoard log directory"
    )
    parser.add_argument(
        "--timing",
        action="store_true",
        help="write wall-clock step timings into trace.csv",
    )
    parser.add_argument(
        "--log_level", type=int, default=30, help="log level for library modules"
    )
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else args.log_level)
    try:
        config = load_config(args.config)
    except ConfigError as e:
        print(e, file=sys.stderr, flush=True)
        return EXIT_CONFIG
    if args.iters is not None and args.iters < 1:
        print("--iters must be >= 1", file=sys.stderr, flush=True)
        return EXIT_CONFIG
    set_global_seed(args.seed)
    if args.sweep is not None:
        if not args.values:
            print("--sweep requires --values", file=sys.stderr, flush=True)
            return EXIT_CONFIG
        seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed]
        names = args.schemes.split(",") if args.schemes else [args.scheme]
        try:
            frame = run_sweep(
                config,
                args.sweep,
                parse_values(args.values, args.sweep),
                [Scheme.from_cli_name(n.strip()) for n in names],
                seeds,
                args.out,
                args.num_workers,
                args.iters,
            )
        except (ConfigError, ValueError) as e:
            print(e, file=sys.stderr, flush=True)
            return EXIT_CONFIG
        print(f"wrote {len(frame)} sweep rows to {args.out}", flush=True)
        return EXIT_OK
    scheme = Scheme.from_cli_name(args.scheme)
    status, result = run_experiment(
        config,
        scheme,
        args.seed,
        args.out,
        max_iter=args.iters,
        tb_dir=args.tb_dir,
        record_timing=args.timing,
    )
    if result is not None and result.traces:
        print(
            f"{scheme.cli_name} seed {args.seed}: J = {result.final_j:.6g}, "
            f"delay = {result.final_delay:.6g} s, "
            f"{result.iterations_used} iterations, status {status}",
            flush=True,
        )
    return status


if __name__ == "__main__":
    sys.exit(main())
