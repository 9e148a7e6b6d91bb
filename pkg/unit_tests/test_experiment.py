"""Unit tests for dtirs_bench.src.experiment."""

import json

import pandas as pd

from dtirs_bench.src.callback import read_scalars
from dtirs_bench.src.config import SolverParams, config_from_dict
from dtirs_bench.src.delay import Placement, audit_constraints
from dtirs_bench.src.experiment import (
    EXIT_OK,
    EXIT_SOLVER,
    load_summary,
    run_experiment,
    trace_columns,
)
from dtirs_bench.src.scenario import build_scenario
from dtirs_bench.src.utils import Scheme


class TestRunExperiment:
    def test_writes_outputs(self, toy_config, tmp_path):
        status, result = run_experiment(toy_config, Scheme.PROPOSED, 0, tmp_path)
        assert status == EXIT_OK
        assert result is not None
        trace = pd.read_csv(tmp_path / "trace.csv")
        assert list(trace.columns) == trace_columns
        assert len(trace) == result.iterations_used
        assert (trace[[f"step{i}_ms" for i in range(1, 6)]] == 0).all().all()
        alloc = pd.read_csv(tmp_path / "alpha.csv")
        assert list(alloc.columns) == ["k", "alpha_k", "m_k", "delta_f_k", "p_ap_k"]
        assert len(alloc) == toy_config.k_users
        with (tmp_path / "summary.json").open() as f:
            summary = json.load(f)
        assert summary["scheme"] == "proposed"
        assert summary["status"] == EXIT_OK
        assert summary["iterations_used"] == result.iterations_used

    def test_deterministic_trace(self, toy_config, tmp_path):
        run_experiment(toy_config, Scheme.PROPOSED, 1, tmp_path / "a")
        run_experiment(toy_config, Scheme.PROPOSED, 1, tmp_path / "b")
        first = (tmp_path / "a" / "trace.csv").read_bytes()
        assert first == (tmp_path / "b" / "trace.csv").read_bytes()

    def test_summary_reaudits_clean(self, toy_config, tmp_path):
        run_experiment(toy_config, Scheme.PROPOSED, 2, tmp_path)
        state, summary = load_summary(tmp_path / "summary.json")
        config = config_from_dict(summary["config"])
        scenario = build_scenario(config, summary["seed"])
        assert state.placement is Placement.SPLIT
        assert audit_constraints(
            config, scenario.channels, scenario.profiles, state
        ) == []

    def test_timing_columns(self, toy_config, tmp_path):
        run_experiment(toy_config, Scheme.PROPOSED, 0, tmp_path, record_timing=True)
        trace = pd.read_csv(tmp_path / "trace.csv")
        assert (trace["step4_ms"] > 0).all()

    def test_full_local_has_no_phase_or_power_step(self, toy_config, tmp_path):
        _, result = run_experiment(
            toy_config, Scheme.FULL_LOCAL, 0, tmp_path, record_timing=True
        )
        assert result is not None
        trace = pd.read_csv(tmp_path / "trace.csv")
        assert len(trace) == 1
        assert trace.loc[0, "step4_ms"] == 0
        assert trace.loc[0, "step5_ms"] == 0

    def test_tensorboard_trace(self, toy_config, tmp_path):
        _, result = run_experiment(
            toy_config, Scheme.PROPOSED, 0, tmp_path / "out", tb_dir=tmp_path / "tb"
        )
        assert result is not None
        values = read_scalars(tmp_path / "tb" / "seed0", "proposed/j_value")
        assert len(values) == result.iterations_used

    def test_solver_failure(self, toy_config, tmp_path):
        config = toy_config.replace(solver=SolverParams(bisect_max_iter=1))
        status, _ = run_experiment(config, Scheme.PROPOSED, 0, tmp_path)
        assert status == EXIT_SOLVER
        assert not (tmp_path / "summary.json").exists()
