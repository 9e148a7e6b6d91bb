"""
Split-point module for DT-IRS-Bench.

Per-UD exhaustive search over the cut layer, trading device/twin compute and
activation upload time against the surrogate training loss.
"""

import numpy as np
import numpy.typing as npt

from dtirs_bench.src.channel import ChannelSet, downlink_gains, uplink_gains
from dtirs_bench.src.config import LossProfile, SystemConfig
from dtirs_bench.src.delay import (
    ProfileSet,
    SolutionState,
    comm_delay,
    downlink_rate,
    mean_loss,
    objective,
    uplink_rate,
)
from dtirs_bench.src.dt import (
    DtBudget,
    allocate_frequency_offsets,
    decide_activation,
    offset_multiplier,
    offsets_at_price,
    price_range,
)
from dtirs_bench.src.numerics import BisectionSpec
from dtirs_bench.src.utils import DomainError

price_grid_size = 12
price_rounds = 3


def surrogate_loss(
    m: npt.ArrayLike, profile: LossProfile | npt.ArrayLike, m_layers: int | None = None
) -> float:
    """
    Average surrogate training loss (1/K) sum_k L(m_k).

    Args:
        m: Cut layers.
        profile: LossProfile, or the loss table itself (index 0 is cut 1).
        m_layers: Number of layers; needed when the profile has no explicit values.

    Raises:
        DomainError: If a cut lies outside 1..M.
    """
    if isinstance(profile, LossProfile):
        if not profile.values and m_layers is None:
            raise DomainError("m_layers is required for a parametric loss profile")
        table = profile.table(len(profile.values) if m_layers is None else m_layers)
    else:
        table = np.asarray(profile, dtype=np.float64)
    return mean_loss(m, table)


def split_metric(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    sol: SolutionState,
    twin_offsets: npt.NDArray[np.float64] | None = None,
) -> npt.NDArray[np.float64]:
    """
    Per-UD cost of every candidate cut, shape (K, M).

    Entry (k, m-1) is T_k^total at cut m plus UD k's share (lambda / K) * L(m)
    of the loss term. The activation is re-derived at each candidate with the
    threshold rule. Twin candidates run at f_k plus the current offset of UD k,
    or at f_k plus ``twin_offsets[k, m-1]`` when a (K, M) table is given.
    """
    k_users = profiles.k_users
    budget = DtBudget.from_config(config)
    loads = profiles.loads
    f = profiles.f_loc[:, None]
    local = f >= loads / budget.t_max
    if twin_offsets is None:
        twin_speed = f + np.asarray(sol.delta_f)[:, None]
    else:
        twin_speed = f + twin_offsets
    t_comp = np.where(local, loads / f, loads / twin_speed)
    rate_ul = np.asarray(uplink_rate(profiles.p_ul, uplink_gains(ch, sol.v), config))
    t_ul = comm_delay(profiles.uplink_bits, rate_ul[:, None])
    rate_dl = np.asarray(downlink_rate(sol.p_ap, downlink_gains(ch, sol.v), config))
    t_dl = np.asarray(comm_delay(profiles.d_dl_bits, rate_dl))[:, None]
    loss = config.loss_profile.table(config.m_layers)[None, :]
    return t_dl + t_ul + t_comp + (config.lambda_weight / k_users) * loss


def select_split_points(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    sol: SolutionState,
    twin_offsets: npt.NDArray[np.float64] | None = None,
) -> npt.NDArray[np.int64]:
    """
    Best cut layer of every UD with the other blocks held fixed.

    Ties go to the smallest cut.

    Returns:
        (K,) cut layers in 1..M.
    """
    metric = split_metric(config, ch, profiles, sol, twin_offsets)
    return np.argmin(metric, axis=1).astype(np.int64) + 1


def complete_twins(
    profiles: ProfileSet,
    sol: SolutionState,
    m: npt.NDArray[np.int64],
    budget: DtBudget,
    spec: BisectionSpec | None = None,
) -> SolutionState:
    """``sol`` at cuts ``m`` with the activation and offsets re-derived."""
    alpha = decide_activation(profiles, m, budget)
    delta_f = allocate_frequency_offsets(profiles, m, alpha, budget, spec)
    return sol.replace(m=m, alpha=alpha, delta_f=delta_f)


def search_twin_cuts(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    sol: SolutionState,
    spec: BisectionSpec | None = None,
    n_prices: int = price_grid_size,
    rounds: int = price_rounds,
) -> npt.NDArray[np.int64]:
    """
    Cut layers with twin candidates priced at the offsets they would receive.

    The plain search prices a twin at the UD's current offset, which is zero for
    a UD that is not a twin yet. Here the shared frequency multiplier is also
    swept over a log grid, together with the multiplier of the current
    allocation. At each multiplier every twin candidate runs at its KKT
    response, and the multiplier is then re-derived from the allocation the
    chosen cuts actually get, for up to ``rounds`` refinements. Every cut vector
    is completed with the activation rule and the offset allocation and scored
    by J. The plain choice is kept unless a priced one is strictly better.

    Returns:
        (K,) cut layers in 1..M.

    Raises:
        ConvergenceError: If an offset allocation hits its bisection cap.
    """
    budget = DtBudget.from_config(config)
    best_m = select_split_points(config, ch, profiles, sol)
    span = price_range(profiles, budget)
    if span is None:
        return best_m
    best_j = objective(
        config, ch, profiles, complete_twins(profiles, sol, best_m, budget, spec)
    )
    prices = [float(lam) for lam in np.geomspace(span[0], span[1], n_prices)]
    current = offset_multiplier(profiles, sol.m, sol.delta_f)
    if current is not None:
        prices.insert(0, current)
    seen = {best_m.tobytes()}
    for lam in prices:
        for _ in range(rounds):
            offsets = offsets_at_price(profiles, lam, budget)
            m = select_split_points(config, ch, profiles, sol, offsets)
            if m.tobytes() in seen:
                break
            seen.add(m.tobytes())
            state = complete_twins(profiles, sol, m, budget, spec)
            j = objective(config, ch, profiles, state)
            if j < best_j:
                best_m, best_j = m, j
            next_lam = offset_multiplier(profiles, m, state.delta_f)
            if next_lam is None:
                break
            lam = next_lam
    return best_m
