"""
Alternating optimization module for DT-IRS-Bench.

Runs the outer block-coordinate loop: cut layers, twin activation, twin
frequency offsets, IRS phases, downlink powers. Every block update is an exact
or guarded minimization, so the objective never increases.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from dtirs_bench.src.channel import ChannelSet
from dtirs_bench.src.config import SystemConfig
from dtirs_bench.src.delay import (
    DelayArrays,
    ProfileSet,
    SolutionState,
    Violation,
    audit_constraints,
    evaluate,
    mean_loss,
    objective,
)
from dtirs_bench.src.dt import DtBudget, allocate_frequency_offsets, decide_activation
from dtirs_bench.src.irs import build_sdp, optimize_phases, solve_sdp
from dtirs_bench.src.numerics import BisectionSpec
from dtirs_bench.src.power import allocate_power, power_instance
from dtirs_bench.src.split import search_twin_cuts
from dtirs_bench.src.utils import ConvergenceError, Scheme, descent_slack

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationTrace:
    """
    Statistics of one outer iteration.

    Attributes:
        iter: Iteration number, starting at 1.
        j_value: Objective J.
        sum_delay: Sum of total delays (s).
        loss_term: Average surrogate loss; J = sum_delay + lambda * loss_term.
        t_dl_sum: Sum of downlink delays (s).
        t_ul_sum: Sum of uplink delays (s).
        t_comp_sum: Sum of compute delays (s).
        per_step_ms: Wall time of the five block updates.
        violations: Number of violated constraints.
        alpha_fraction_dt: Fraction of UDs served by their twin.
        mean_p_ap: Average downlink power (W).
    """

    iter: int
    j_value: float
    sum_delay: float
    loss_term: float
    t_dl_sum: float
    t_ul_sum: float
    t_comp_sum: float
    per_step_ms: tuple[float, float, float, float, float]
    violations: int
    alpha_fraction_dt: float
    mean_p_ap: float


@dataclass(frozen=True)
class RunResult:
    """
    Outcome of one scheme on one scenario.

    Attributes:
        final: Final decision blocks.
        traces: One entry per iteration (generation for GA).
        converged: Whether the stopping rule fired before the iteration cap.
        iterations_used: Number of iterations run.
        violations: Constraint audit of the final state.
        scheme: Scheme that produced the result.
        delays: Per-UD delays of the final state.
        infeasible_reason: Set when a subproblem had no feasible point.
    """

    final: SolutionState
    traces: list[IterationTrace]
    converged: bool
    iterations_used: int
    violations: list[Violation]
    scheme: Scheme
    delays: DelayArrays
    infeasible_reason: str | None = field(default=None)

    @property
    def feasible(self) -> bool:
        return not self.violations and self.infeasible_reason is None

    @property
    def final_j(self) -> float:
        return self.traces[-1].j_value

    @property
    def final_delay(self) -> float:
        return self.traces[-1].sum_delay


IterationCallback = Callable[[IterationTrace], None]


def make_trace(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    sol: SolutionState,
    iteration: int,
    per_step_ms: tuple[float, float, float, float, float] = (0.0,) * 5,
) -> tuple[IterationTrace, DelayArrays, list[Violation]]:
    """Evaluate a state and package its statistics."""
    delays = evaluate(config, ch, profiles, sol)
    loss = mean_loss(sol.m, config.loss_profile.table(config.m_layers))
    sum_delay = float(np.sum(delays.t_total))
    violations = audit_constraints(config, ch, profiles, sol)
    trace = IterationTrace(
        iter=iteration,
        j_value=sum_delay + config.lambda_weight * loss,
        sum_delay=sum_delay,
        loss_term=loss,
        t_dl_sum=float(np.sum(delays.t_dl)),
        t_ul_sum=float(np.sum(delays.t_ul)),
        t_comp_sum=float(np.sum(delays.t_comp)),
        per_step_ms=per_step_ms,
        violations=len(violations),
        alpha_fraction_dt=float(np.mean(np.asarray(sol.alpha) == 0)),
        mean_p_ap=float(np.mean(sol.p_ap)),
    )
    return trace, delays, violations


def initialize(
    config: SystemConfig, ch: ChannelSet, profiles: ProfileSet, seed: int
) -> SolutionState:
    """
    Random starting point.

    Cuts are uniform in 1..M, activation follows the threshold rule, offsets are
    zero, phases are all ones and power is split equally.
    """
    rng = np.random.default_rng(seed)
    k = profiles.k_users
    m = rng.integers(1, config.m_layers + 1, size=k).astype(np.int64)
    alpha = decide_activation(profiles, m, DtBudget.from_config(config))
    return SolutionState(
        m=m,
        alpha=alpha,
        delta_f=np.zeros(k),
        v=np.ones(ch.n_irs, dtype=np.complex128),
        p_ap=np.full(k, min(config.p_total_w / k, config.p_max_w)),
    )


def bisection_spec(config: SystemConfig) -> BisectionSpec:
    """Tolerances for the multiplier searches; brackets are set by the solvers."""
    return BisectionSpec(
        0.0,
        1.0,
        tol_abs=config.solver.bisect_tol,
        max_iter=config.solver.bisect_max_iter,
    )


def run(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    seed: int,
    max_iter: int | None = None,
    eps_conv: float | None = None,
    initial: SolutionState | None = None,
    callback: IterationCallback | None = None,
) -> RunResult:
    """
    Alternating optimization of the five blocks.

    Args:
        config: Scenario parameters.
        ch: Channels.
        profiles: UD profiles.
        seed: Seeds the random start and the phase randomization.
        max_iter: Outer iteration cap, defaults to ``solver.max_iter``.
        eps_conv: Stop when |J_t - J_{t-1}| <= eps_conv * max(1, |J_t|),
            defaults to ``solver.eps_conv``.
        initial: Starting point; a random one is drawn when omitted.
        callback: Called with every IterationTrace.

    Returns:
        RunResult with one trace per iteration.

    Raises:
        ConvergenceError: If a subproblem solver fails; ``best`` holds the
            RunResult of the iterations completed so far.
    """
    max_iter = config.solver.max_iter if max_iter is None else max_iter
    eps_conv = config.solver.eps_conv if eps_conv is None else eps_conv
    assert max_iter >= 1
    budget = DtBudget.from_config(config)
    spec = bisection_spec(config)
    init_seq, rand_seq = np.random.SeedSequence(seed).spawn(2)
    rand_seeds = rand_seq.generate_state(max_iter)
    state = initial or initialize(
        config, ch, profiles, int(init_seq.generate_state(1)[0])
    )
    j_prev = objective(config, ch, profiles, state)
    logger.debug("start J=%.12g", j_prev)
    sdp = build_sdp(ch)
    sdp_solution = None
    traces: list[IterationTrace] = []
    delays, violations = evaluate(config, ch, profiles, state), []
    converged = False
    for t in range(1, max_iter + 1):
        step_ms = []
        try:
            tic = time.perf_counter()
            m = search_twin_cuts(config, ch, profiles, state, spec)
            state = state.replace(m=m)
            step_ms.append(_log_step(1, tic, config, ch, profiles, state))

            tic = time.perf_counter()
            alpha = decide_activation(profiles, state.m, budget)
            state = state.replace(
                alpha=alpha, delta_f=np.where(alpha == 1, 0.0, state.delta_f)
            )
            step_ms.append(_log_step(2, tic, config, ch, profiles, state))

            tic = time.perf_counter()
            delta_f = allocate_frequency_offsets(
                profiles, state.m, state.alpha, budget, spec
            )
            state = state.replace(delta_f=delta_f)
            step_ms.append(_log_step(3, tic, config, ch, profiles, state))

            tic = time.perf_counter()
            if sdp_solution is None:
                sdp_solution = solve_sdp(
                    sdp, config.solver.sdp_tol, config.solver.sdp_max_iter
                )
            v = optimize_phases(
                ch,
                config.solver.n_rand,
                config.solver.sdp_tol,
                int(rand_seeds[t - 1]),
                incumbent=state.v,
                prob=sdp,
                solution=sdp_solution,
            )
            candidate = state.replace(v=v)
            if objective(config, ch, profiles, candidate) <= objective(
                config, ch, profiles, state
            ):
                state = candidate
            step_ms.append(_log_step(4, tic, config, ch, profiles, state))

            tic = time.perf_counter()
            inst = power_instance(config, ch, profiles, state.v)
            state = state.replace(p_ap=allocate_power(inst, spec))
            step_ms.append(_log_step(5, tic, config, ch, profiles, state))
        except ConvergenceError as e:
            partial = RunResult(
                state, traces, False, len(traces), violations, Scheme.PROPOSED, delays
            )
            raise ConvergenceError(f"iteration {t}: {e}", partial) from e
        trace, delays, violations = make_trace(
            config, ch, profiles, state, t, tuple(step_ms)
        )
        traces.append(trace)
        if callback is not None:
            callback(trace)
        j = trace.j_value
        if j > j_prev + descent_slack * max(1.0, j_prev):
            logger.warning("objective rose from %.12g to %.12g at %d", j_prev, j, t)
        if abs(j - j_prev) <= eps_conv * max(1.0, abs(j)):
            converged = True
            break
        j_prev = j
    return RunResult(
        state, traces, converged, len(traces), violations, Scheme.PROPOSED, delays
    )


def _log_step(
    step: int,
    tic: float,
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    state: SolutionState,
) -> float:
    elapsed = 1000.0 * (time.perf_counter() - tic)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "step %d J=%.12g", step, objective(config, ch, profiles, state)
        )
    return elapsed
