"""
Experiment module for DT-IRS-Bench.

Runs one scheme on one seeded scenario and writes its trace, summary, and
per-UD allocation files.
"""

import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from dtirs_bench.src.baselines import run_admm, run_full_local, run_full_offload, run_ga
from dtirs_bench.src.callback import TraceCallback
from dtirs_bench.src.config import SystemConfig, config_to_dict
from dtirs_bench.src.delay import Placement, SolutionState
from dtirs_bench.src.optimizer import IterationCallback, RunResult, run
from dtirs_bench.src.scenario import Scenario, build_scenario
from dtirs_bench.src.utils import ConvergenceError, Scheme

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3
EXIT_SOLVER = 4

trace_columns = [
    "iter",
    "j_value",
    "sum_delay_s",
    "loss_term",
    "t_dl_sum",
    "t_ul_sum",
    "t_comp_sum",
    "dt_fraction",
    "violations",
    "step1_ms",
    "step2_ms",
    "step3_ms",
    "step4_ms",
    "step5_ms",
]
float_format = "%.12g"


def run_scheme(
    scenario: Scenario,
    scheme: Scheme,
    max_iter: int | None = None,
    callback: IterationCallback | None = None,
) -> RunResult:
    """Dispatch a scheme on a scenario."""
    config, ch, profiles = scenario.config, scenario.channels, scenario.profiles
    seed = scenario.solver_seed
    match scheme:
        case Scheme.PROPOSED:
            return run(config, ch, profiles, seed, max_iter=max_iter, callback=callback)
        case Scheme.FULL_LOCAL:
            return run_full_local(config, ch, profiles, callback=callback)
        case Scheme.FULL_OFFLOAD:
            return run_full_offload(config, ch, profiles, seed, callback=callback)
        case Scheme.GA:
            return run_ga(config, ch, profiles, config.ga, seed, callback=callback)
        case Scheme.ADMM:
            return run_admm(
                config, ch, profiles, config.admm.rho, seed, callback=callback
            )


def trace_frame(result: RunResult, record_timing: bool = False) -> pd.DataFrame:
    """Trace table; step timings are zero unless ``record_timing`` is set."""
    rows = []
    for t in result.traces:
        steps = t.per_step_ms if record_timing else (0.0,) * 5
        rows.append(
            [
                t.iter,
                t.j_value,
                t.sum_delay,
                t.loss_term,
                t.t_dl_sum,
                t.t_ul_sum,
                t.t_comp_sum,
                t.alpha_fraction_dt,
                t.violations,
                *steps,
            ]
        )
    return pd.DataFrame(rows, columns=trace_columns)


def allocation_frame(state: SolutionState) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "k": np.arange(len(state.m)),
            "alpha_k": state.alpha,
            "m_k": state.m,
            "delta_f_k": state.delta_f,
            "p_ap_k": state.p_ap,
        }
    )


def summary_dict(
    result: RunResult, config: SystemConfig, seed: int, status: int
) -> dict[str, Any]:
    state = result.final
    return {
        "scheme": result.scheme.cli_name,
        "seed": seed,
        "status": status,
        "converged": result.converged,
        "feasible": result.feasible,
        "infeasible_reason": result.infeasible_reason,
        "iterations_used": result.iterations_used,
        "final_j": result.final_j if result.traces else None,
        "sum_delay_s": float(np.sum(result.delays.t_total)),
        "t_dl_sum": float(np.sum(result.delays.t_dl)),
        "t_ul_sum": float(np.sum(result.delays.t_ul)),
        "t_comp_sum": float(np.sum(result.delays.t_comp)),
        "loss_term": result.traces[-1].loss_term if result.traces else None,
        "mean_p_ap": float(np.mean(state.p_ap)),
        "dt_fraction": float(np.mean(state.alpha == 0)),
        "violations": [
            {"constraint": v.constraint, "k": v.k, "residual": v.residual}
            for v in result.violations
        ],
        "state": {
            "placement": state.placement.name.lower(),
            "m": state.m.tolist(),
            "alpha": state.alpha.tolist(),
            "delta_f": state.delta_f.tolist(),
            "v_real": state.v.real.tolist(),
            "v_imag": state.v.imag.tolist(),
            "p_ap": state.p_ap.tolist(),
        },
        "config": config_to_dict(config),
    }


def load_summary(path: str | Path) -> tuple[SolutionState, dict[str, Any]]:
    """
    Reload the final state stored in a summary.json.

    Returns:
        (state, summary) so the state can be re-audited against the stored
        config.
    """
    with Path(path).open() as f:
        summary = json.load(f)
    s = summary["state"]
    state = SolutionState(
        m=np.asarray(s["m"], dtype=np.int64),
        alpha=np.asarray(s["alpha"], dtype=np.int64),
        delta_f=np.asarray(s["delta_f"], dtype=np.float64),
        v=np.asarray(s["v_real"]) + 1j * np.asarray(s["v_imag"]),
        p_ap=np.asarray(s["p_ap"], dtype=np.float64),
        placement=Placement[s["placement"].upper()],
    )
    return state, summary


def write_outputs(
    result: RunResult,
    config: SystemConfig,
    seed: int,
    out_dir: Path,
    status: int,
    record_timing: bool = False,
):
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_frame(result, record_timing).to_csv(
        out_dir / "trace.csv", index=False, float_format=float_format
    )
    allocation_frame(result.final).to_csv(
        out_dir / "alpha.csv", index=False, float_format=float_format
    )
    with (out_dir / "summary.json").open("w") as f:
        json.dump(summary_dict(result, config, seed, status), f, indent=2)


def run_experiment(
    config: SystemConfig,
    scheme: Scheme,
    seed: int,
    out_dir: str | Path,
    max_iter: int | None = None,
    tb_dir: str | Path | None = None,
    record_timing: bool = False,
) -> tuple[int, RunResult | None]:
    """
    Run one scheme on one seeded scenario and write trace.csv, alpha.csv and
    summary.json into ``out_dir``.

    Args:
        config: Scenario parameters.
        scheme: Scheme to run.
        seed: Scenario seed.
        out_dir: Output directory, created if missing.
        max_iter: Outer iteration cap of the proposed scheme.
        tb_dir: Optional TensorBoard log directory.
        record_timing: Write wall-clock step timings into trace.csv.

    Returns:
        (exit status, result); the result is None when no iteration completed.
    """
    out_dir = Path(out_dir)
    scenario = build_scenario(config, seed)
    callback = None
    if tb_dir is not None:
        callback = TraceCallback(Path(tb_dir) / f"seed{seed}", scheme.cli_name)
    try:
        result = run_scheme(scenario, scheme, max_iter, callback)
    except ConvergenceError as e:
        print(f"{scheme.cli_name} on seed {seed} failed: {e}", flush=True)
        partial = e.best if isinstance(e.best, RunResult) else None
        if partial is not None and partial.traces:
            write_outputs(partial, config, seed, out_dir, EXIT_SOLVER, record_timing)
        return EXIT_SOLVER, partial
    finally:
        if callback is not None:
            callback.close()
    status = EXIT_OK if result.feasible else EXIT_INFEASIBLE
    write_outputs(result, config, seed, out_dir, status, record_timing)
    return status, result
