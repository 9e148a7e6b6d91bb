"""
Sweep module for DT-IRS-Bench.

Runs every (axis value, scheme, seed) cell of a parameter sweep, each into its
own output directory, and merges the per-cell results into sweep.csv and a
median-aggregated sweep_median.csv.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from dtirs_bench.src.config import (
    SystemConfig,
    config_from_dict,
    config_to_dict,
    load_config,
)
from dtirs_bench.src.experiment import (
    EXIT_CONFIG,
    EXIT_OK,
    float_format,
    run_experiment,
)
from dtirs_bench.src.utils import ConfigError, Scheme, set_global_seed

axes = {"k_users": int, "n_irs": int, "p_total_w": float}
sweep_columns = [
    "axis",
    "value",
    "scheme",
    "seed",
    "status",
    "final_j",
    "final_delay",
    "mean_p_ap",
    "dt_fraction",
    "loss_term",
    "converged",
    "feasible",
    "iterations_used",
]
median_columns = [
    "final_j",
    "final_delay",
    "mean_p_ap",
    "dt_fraction",
    "loss_term",
    "iterations_used",
]


def with_axis_value(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Copy of a config with one swept field changed, re-validated."""
    if axis not in axes:
        raise ConfigError([f"sweep axis {axis}: expected one of {sorted(axes)}"])
    data = config_to_dict(config)
    data[axis] = axes[axis](value)
    return config_from_dict(data)


def cell_dir(out_dir: Path, axis: str, value: float, scheme: Scheme, seed: int) -> Path:
    return out_dir / f"{axis}_{value:g}" / scheme.cli_name / f"seed{seed}"


def run_cell(
    config: SystemConfig,
    axis: str,
    value: float,
    scheme: Scheme,
    seed: int,
    out_dir: Path,
    max_iter: int | None,
) -> dict[str, Any]:
    """Run one sweep cell and return its sweep.csv row."""
    cell_config = with_axis_value(config, axis, value)
    target = cell_dir(out_dir, axis, value, scheme, seed)
    status, result = run_experiment(cell_config, scheme, seed, target, max_iter)
    print(
        f"{axis}={value:g} {scheme.cli_name} seed {seed}: status {status}",
        flush=True,
    )
    row: dict[str, Any] = {
        "axis": axis,
        "value": axes[axis](value),
        "scheme": scheme.cli_name,
        "seed": seed,
        "status": status,
    }
    if result is None or not result.traces:
        return {**row, **{c: np.nan for c in sweep_columns if c not in row}}
    last = result.traces[-1]
    return {
        **row,
        "final_j": last.j_value,
        "final_delay": last.sum_delay,
        "mean_p_ap": last.mean_p_ap,
        "dt_fraction": last.alpha_fraction_dt,
        "loss_term": last.loss_term,
        "converged": result.converged,
        "feasible": result.feasible,
        "iterations_used": result.iterations_used,
    }


def _run_cell_star(args: tuple) -> dict[str, Any]:
    return run_cell(*args)


def run_sweep(
    config: SystemConfig,
    axis: str,
    values: list[float],
    schemes: list[Scheme],
    seeds: list[int],
    out_dir: str | Path,
    num_workers: int = 0,
    max_iter: int | None = None,
) -> pd.DataFrame:
    """
    Run a full sweep grid.

    Args:
        config: Base scenario; only ``axis`` changes across cells.
        axis: One of k_users, n_irs, p_total_w.
        values: Axis values, at least one.
        schemes: Schemes to compare.
        seeds: Scenario seeds.
        out_dir: Root directory; every cell writes into its own subdirectory.
        num_workers: Worker processes (0 for sequential).
        max_iter: Outer iteration cap of the proposed scheme.

    Returns:
        The sweep.csv table, one row per (value, scheme, seed).
    """
    assert values, "a sweep needs at least one value"
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # validate every axis value before starting any cell
    for value in values:
        with_axis_value(config, axis, value)
    jobs = [
        (config, axis, value, scheme, seed, out_dir, max_iter)
        for value in values
        for scheme in schemes
        for seed in seeds
    ]
    if num_workers == 0:
        rows = [_run_cell_star(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=num_workers) as executor:
            rows = list(executor.map(_run_cell_star, jobs))
    frame = pd.DataFrame(rows, columns=sweep_columns)
    frame.to_csv(out_dir / "sweep.csv", index=False, float_format=float_format)
    median_frame(frame).to_csv(
        out_dir / "sweep_median.csv", index=False, float_format=float_format
    )
    return frame


def median_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Median over seeds of every metric, per (axis, value, scheme)."""
    return (
        frame.groupby(["axis", "value", "scheme"], sort=False)[median_columns]
        .median()
        .reset_index()
    )


def parse_values(text: str, axis: str) -> list[float]:
    return [axes[axis](v) for v in text.split(",") if v.strip()]


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, run the sweep, and return the process exit status."""
    parser = argparse.ArgumentParser(description="Run a DT-IRS parameter sweep")
    parser.add_argument("--config", type=str, default=None, help="scenario TOML file")
    parser.add_argument(
        "--sweep", type=str, required=True, choices=list(axes), help="swept field"
    )
    parser.add_argument(
        "--values", type=str, required=True, help="comma-separated axis values"
    )
    parser.add_argument(
        "--schemes",
        type=str,
        default=",".join(s.cli_name for s in Scheme),
        help="comma-separated schemes to compare",
    )
    parser.add_argument(
        "--seeds", type=str, default="0", help="comma-separated scenario seeds"
    )
    parser.add_argument("--iters", type=int, default=None, help="outer iteration cap")
    parser.add_argument("--out", type=str, required=True, help="output directory")
    parser.add_argument(
        "--num_workers", type=int, default=0, help="worker processes (0 for sequential)"
    )
    parser.add_argument(
        "--log_level", type=int, default=30, help="log level for library modules"
    )
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level)
    try:
        config = load_config(args.config)
        values = parse_values(args.values, args.sweep)
        schemes = [Scheme.from_cli_name(s.strip()) for s in args.schemes.split(",")]
        seeds = [int(s) for s in args.seeds.split(",")]
        if not values:
            raise ConfigError(["--values: at least one value is required"])
        if args.iters is not None and args.iters < 1:
            raise ConfigError(["--iters: must be >= 1"])
        set_global_seed(seeds[0])
        frame = run_sweep(
            config,
            args.sweep,
            values,
            schemes,
            seeds,
            args.out,
            args.num_workers,
            args.iters,
        )
    except (ConfigError, ValueError) as e:
        print(e, file=sys.stderr, flush=True)
        return EXIT_CONFIG
    print(median_frame(frame).to_string(index=False), flush=True)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
