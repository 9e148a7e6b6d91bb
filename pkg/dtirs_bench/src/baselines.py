"""
Baseline schemes module for DT-IRS-Bench.

Four comparison schemes sharing the channel and delay models of the proposed
optimizer: full local execution, full offloading through the IRS, and genetic
and ADMM searches over the cut layers whose remaining blocks are resolved by
the same subroutines as the proposed scheme.
"""

import logging
import time

import numpy as np
import numpy.typing as npt

from dtirs_bench.src.channel import ChannelSet, uplink_gains
from dtirs_bench.src.config import AdmmParams, GaParams, SystemConfig
from dtirs_bench.src.delay import (
    Placement,
    ProfileSet,
    SolutionState,
    objective,
    uplink_rate,
)
from dtirs_bench.src.dt import DtBudget, allocate_frequency_offsets, decide_activation
from dtirs_bench.src.irs import build_sdp, optimize_phases, solve_sdp
from dtirs_bench.src.optimizer import (
    IterationCallback,
    IterationTrace,
    RunResult,
    bisection_spec,
    make_trace,
)
from dtirs_bench.src.power import allocate_power, min_rate_floor, power_instance
from dtirs_bench.src.utils import InfeasibleError, Scheme

logger = logging.getLogger(__name__)

balance_ratio = 10.0
balance_factor = 2.0


def _finish(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    state: SolutionState,
    scheme: Scheme,
    traces: list[IterationTrace],
    converged: bool,
    per_step_ms: tuple[float, float, float, float, float] = (0.0,) * 5,
    infeasible_reason: str | None = None,
    callback: IterationCallback | None = None,
) -> RunResult:
    trace, delays, violations = make_trace(
        config, ch, profiles, state, len(traces) + 1, per_step_ms
    )
    if not traces or traces[-1].j_value != trace.j_value:
        traces = [*traces, trace]
        if callback is not None:
            callback(trace)
    return RunResult(
        state,
        traces,
        converged,
        len(traces),
        violations,
        scheme,
        delays,
        infeasible_reason,
    )


def run_full_local(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    callback: IterationCallback | None = None,
) -> RunResult:
    """
    Every UD runs the whole network on its own CPU.

    Nothing is uploaded and the IRS is idle. The downlink payload only costs
    time when the direct AP-UD link is enabled, in which case power is split
    equally.
    """
    k = profiles.k_users
    p = np.zeros(k)
    if ch.direct_link:
        p = np.full(k, min(config.p_total_w / k, config.p_max_w))
    state = SolutionState(
        m=np.full(k, config.m_layers, dtype=np.int64),
        alpha=np.ones(k, dtype=np.int64),
        delta_f=np.zeros(k),
        v=np.ones(ch.n_irs, dtype=np.complex128),
        p_ap=p,
        placement=Placement.LOCAL,
    )
    return _finish(
        config, ch, profiles, state, Scheme.FULL_LOCAL, [], True, callback=callback
    )


def _design_phases(config: SystemConfig, ch: ChannelSet, seed: int):
    sdp = build_sdp(ch)
    solution = solve_sdp(sdp, config.solver.sdp_tol, config.solver.sdp_max_iter)
    return optimize_phases(
        ch,
        config.solver.n_rand,
        config.solver.sdp_tol,
        seed,
        incumbent=np.ones(ch.n_irs, dtype=np.complex128),
        prob=sdp,
        solution=solution,
    )


def run_full_offload(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    seed: int = 0,
    callback: IterationCallback | None = None,
) -> RunResult:
    """
    Every UD uploads its raw input; the AP runs the whole network.

    Phases come from the IRS design and downlink power is allocated with a
    minimum-rate floor per UD. The AP computes at ``f_ap_hz``; twins are off.
    An infeasible power floor yields an equal split and an infeasible result.
    """
    k = profiles.k_users
    tic = time.perf_counter()
    v = _design_phases(config, ch, seed)
    phase_ms = 1000.0 * (time.perf_counter() - tic)
    tic = time.perf_counter()
    inst = power_instance(config, ch, profiles, v)
    floor = min_rate_floor(config, inst.a)
    inst = power_instance(config, ch, profiles, v, p_min=np.where(inst.a > 0, floor, 0))
    reason = None
    try:
        p = allocate_power(inst, bisection_spec(config))
    except InfeasibleError as e:
        logger.warning("full offload: %s", e)
        reason = str(e)
        p = np.full(k, min(config.p_total_w / k, config.p_max_w))
    power_ms = 1000.0 * (time.perf_counter() - tic)
    state = SolutionState(
        m=np.ones(k, dtype=np.int64),
        alpha=np.ones(k, dtype=np.int64),
        delta_f=np.zeros(k),
        v=v,
        p_ap=p,
        placement=Placement.OFFLOAD,
    )
    return _finish(
        config,
        ch,
        profiles,
        state,
        Scheme.FULL_OFFLOAD,
        [],
        True,
        (0.0, 0.0, 0.0, phase_ms, power_ms),
        reason,
        callback,
    )


class _CutResolver:
    """
    Completes a cut-layer vector into a full solution.

    Phases and powers do not depend on the cuts, so they are designed once; the
    activation and twin offsets are resolved per candidate. Objectives are
    memoized per cut vector.
    """

    def __init__(
        self, config: SystemConfig, ch: ChannelSet, profiles: ProfileSet, seed: int
    ):
        self.config = config
        self.ch = ch
        self.profiles = profiles
        self.budget = DtBudget.from_config(config)
        self.spec = bisection_spec(config)
        self.v = _design_phases(config, ch, seed)
        self.p = allocate_power(
            power_instance(config, ch, profiles, self.v), self.spec
        )
        self._cache: dict[bytes, float] = {}

    def state(self, m: npt.NDArray[np.int64]) -> SolutionState:
        alpha = decide_activation(self.profiles, m, self.budget)
        delta_f = allocate_frequency_offsets(
            self.profiles, m, alpha, self.budget, self.spec
        )
        return SolutionState(m.astype(np.int64), alpha, delta_f, self.v, self.p)

    def fitness(self, m: npt.NDArray[np.int64]) -> float:
        key = m.astype(np.int64).tobytes()
        if key not in self._cache:
            self._cache[key] = objective(
                self.config, self.ch, self.profiles, self.state(m)
            )
        return self._cache[key]


def _progress_trace(
    resolver: _CutResolver, m: npt.NDArray[np.int64], iteration: int
) -> IterationTrace:
    trace, _, _ = make_trace(
        resolver.config, resolver.ch, resolver.profiles, resolver.state(m), iteration
    )
    return trace


def run_ga(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    params: GaParams,
    seed: int,
    seed_population: npt.ArrayLike | None = None,
    callback: IterationCallback | None = None,
) -> RunResult:
    """
    Genetic search over the cut-layer vector.

    Tournament selection, uniform crossover, per-gene reset mutation and
    single-individual elitism. One trace is recorded per generation with the
    best-ever individual, so the trace is non-increasing.

    Args:
        config: Scenario parameters.
        ch: Channels.
        profiles: UD profiles.
        params: GA hyperparameters.
        seed: Seeds the phase design and the GA.
        seed_population: Optional cut vectors placed at the start of the first
            population.
        callback: Called with every generation's trace.

    Returns:
        RunResult of the best individual ever seen.
    """
    rng = np.random.default_rng(seed)
    resolver = _CutResolver(config, ch, profiles, seed)
    k, m_layers = profiles.k_users, config.m_layers
    if m_layers == 1:
        best = np.ones(k, dtype=np.int64)
        return _finish(
            config,
            ch,
            profiles,
            resolver.state(best),
            Scheme.GA,
            [],
            True,
            callback=callback,
        )
    population = rng.integers(1, m_layers + 1, size=(params.population, k))
    if seed_population is not None:
        seeded = np.atleast_2d(np.asarray(seed_population, dtype=np.int64))
        n = min(len(seeded), params.population)
        population[:n] = seeded[:n]
    best, best_fit = population[0].copy(), np.inf
    traces: list[IterationTrace] = []
    for gen in range(1, params.generations + 1):
        fits = np.array([resolver.fitness(ind) for ind in population])
        leader = int(np.argmin(fits))
        if fits[leader] < best_fit:
            best, best_fit = population[leader].copy(), float(fits[leader])
        trace = _progress_trace(resolver, best, gen)
        traces.append(trace)
        if callback is not None:
            callback(trace)
        children = [best.copy()]
        while len(children) < params.population:
            mother = population[_tournament(rng, fits, params.tournament_size)]
            father = population[_tournament(rng, fits, params.tournament_size)]
            if rng.random() < params.crossover_rate:
                mask = rng.random(k) < 0.5
                child = np.where(mask, mother, father)
            else:
                child = mother.copy()
            mutate = rng.random(k) < params.mutation_rate
            child = np.where(mutate, rng.integers(1, m_layers + 1, size=k), child)
            children.append(child)
        population = np.array(children)
    return _finish(
        config,
        ch,
        profiles,
        resolver.state(best),
        Scheme.GA,
        traces,
        True,
        callback=callback,
    )


def _tournament(rng: np.random.Generator, fits: npt.NDArray, size: int) -> int:
    entrants = rng.integers(0, len(fits), size=size)
    return int(entrants[np.argmin(fits[entrants])])


def _pwl_prox(
    knots: npt.NDArray[np.float64], anchor: npt.NDArray[np.float64], rho: float
) -> npt.NDArray[np.float64]:
    """
    Exact argmin over x in [1, M] of h_k(x) + rho / 2 (x - anchor_k)^2, where h_k
    interpolates knots[k] linearly between integer cuts. Every segment is
    minimized in closed form and the best segment wins.
    """
    k, m_layers = knots.shape
    if m_layers == 1:
        return np.ones(k)
    left = np.arange(1, m_layers, dtype=np.float64)[None, :]
    slope = np.diff(knots, axis=1)
    x = np.clip(anchor[:, None] - slope / rho, left, left + 1)
    value = knots[:, :-1] + slope * (x - left) + 0.5 * rho * (x - anchor[:, None]) ** 2
    best = np.argmin(value, axis=1)
    return x[np.arange(k), best]


def _lower_envelope(knots: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Greatest convex minorant of every row, evaluated at the integer cuts."""
    k, m_layers = knots.shape
    cuts = np.arange(1, m_layers + 1, dtype=np.float64)
    out = knots.copy()
    for row in range(k):
        y = knots[row]
        if not np.all(np.isfinite(y)):
            continue
        hull: list[int] = []
        for i in range(m_layers):
            while len(hull) >= 2:
                a, b = hull[-2], hull[-1]
                if (y[b] - y[a]) * (i - a) >= (y[i] - y[a]) * (b - a):
                    hull.pop()
                else:
                    break
            hull.append(i)
        out[row] = np.interp(cuts, cuts[hull], y[hull])
    return out


def run_admm(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    rho: float,
    seed: int,
    params: AdmmParams | None = None,
    callback: IterationCallback | None = None,
) -> RunResult:
    """
    Consensus ADMM on the relaxed cut layers, then rounding.

    Each cut m_k is relaxed to [1, M] with per-UD piecewise-linear
    interpolation of the local compute time C^(m)/f_loc, the upload time
    D_UL(m)/R_UL and the loss share (lambda / K) L(m). Both curves are
    replaced by their greatest convex minorants so both parts are convex. The
    delay part acts on x, the loss part on z, and x = z is enforced with a
    scaled dual u. The penalty is rebalanced whenever one residual exceeds the
    other tenfold. Every iterate is rounded to the nearest cut and resolved; the
    best rounded iterate is returned.

    Args:
        config: Scenario parameters.
        ch: Channels.
        profiles: UD profiles.
        rho: Initial penalty parameter, > 0.
        seed: Seeds the phase design.
        params: Iteration cap and residual tolerance; ``config.admm`` if omitted.
        callback: Called with every iteration's trace.

    Returns:
        RunResult; ``converged`` is False when both residuals did not fall below
        the tolerance within the cap.
    """
    assert rho > 0
    params = params or config.admm
    resolver = _CutResolver(config, ch, profiles, seed)
    k, m_layers = profiles.k_users, config.m_layers
    rate_ul = np.asarray(
        uplink_rate(profiles.p_ul, uplink_gains(ch, resolver.v), config)
    )
    with np.errstate(divide="ignore"):
        upload = np.where(
            rate_ul[:, None] > 0, profiles.uplink_bits / rate_ul[:, None], np.inf
        )
    delay_knots = _lower_envelope(profiles.loads / profiles.f_loc[:, None] + upload)
    loss = config.loss_profile.table(m_layers)
    loss_knots = _lower_envelope(np.tile((config.lambda_weight / k) * loss, (k, 1)))
    z = np.full(k, (1 + m_layers) / 2.0)
    u = np.zeros(k)
    best = np.rint(z).astype(np.int64)
    best_fit = np.inf
    traces: list[IterationTrace] = []
    converged = False
    for it in range(1, params.max_iter + 1):
        x = _pwl_prox(delay_knots, z - u, rho)
        z_prev = z
        z = _pwl_prox(loss_knots, x + u, rho)
        u = u + x - z
        rounded = np.clip(np.floor(z + 0.5), 1, m_layers).astype(np.int64)
        fit = resolver.fitness(rounded)
        if fit < best_fit:
            best, best_fit = rounded, fit
        trace = _progress_trace(resolver, best, it)
        traces.append(trace)
        if callback is not None:
            callback(trace)
        primal = float(np.max(np.abs(x - z)))
        dual = rho * float(np.max(np.abs(z - z_prev)))
        if primal <= params.tol and dual <= params.tol:
            converged = True
            break
        if primal > balance_ratio * dual:
            rho, u = rho * balance_factor, u / balance_factor
        elif dual > balance_ratio * primal:
            rho, u = rho / balance_factor, u * balance_factor
    if not converged:
        logger.warning(
            "ADMM stopped at the cap with residuals %.3g / %.3g", primal, dual
        )
    return _finish(
        config,
        ch,
        profiles,
        resolver.state(best),
        Scheme.ADMM,
        traces,
        converged,
        callback=callback,
    )
