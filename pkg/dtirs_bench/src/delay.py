"""
Delay module for DT-IRS-Bench.

Evaluates uplink/downlink rates, communication and computation delays, the
per-UD delay breakdown, the global objective J, and the constraint audit.
Every evaluation is vectorized over UDs; the per-UD helpers are thin views.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum, auto, unique

import numpy as np
import numpy.typing as npt

from dtirs_bench.src.channel import ChannelSet, downlink_gains, uplink_gains
from dtirs_bench.src.config import SystemConfig
from dtirs_bench.src.utils import (
    DomainError,
    ShapeError,
    dt_budget_slack,
    power_budget_slack,
    unit_modulus_tol,
)


@dataclass(frozen=True)
class UDProfile:
    """
    Compute and payload description of one UD.

    Attributes:
        f_loc: Local CPU frequency (cycles/s).
        layer_loads: (M,) cumulative cycles to run layers 1..m.
        layer_uplink_bits: (M,) activation size sent after cut m.
        d_dl_bits: Downlink payload (bits).
        p_ul: Uplink transmit power (W).
        raw_input_bits: Size of the raw input, sent when nothing runs locally.
    """

    f_loc: float
    layer_loads: npt.NDArray[np.float64]
    layer_uplink_bits: npt.NDArray[np.float64]
    d_dl_bits: float
    p_ul: float
    raw_input_bits: float


@dataclass(frozen=True)
class ProfileSet:
    """UD profiles stacked along the first axis for vectorized evaluation."""

    f_loc: npt.NDArray[np.float64]
    loads: npt.NDArray[np.float64]
    uplink_bits: npt.NDArray[np.float64]
    d_dl_bits: npt.NDArray[np.float64]
    p_ul: npt.NDArray[np.float64]
    raw_input_bits: npt.NDArray[np.float64]

    @property
    def k_users(self) -> int:
        return self.f_loc.shape[0]

    @property
    def m_layers(self) -> int:
        return self.loads.shape[1]

    def __getitem__(self, k: int) -> UDProfile:
        return UDProfile(
            float(self.f_loc[k]),
            self.loads[k],
            self.uplink_bits[k],
            float(self.d_dl_bits[k]),
            float(self.p_ul[k]),
            float(self.raw_input_bits[k]),
        )

    def subset(self, users: npt.ArrayLike) -> "ProfileSet":
        idx = np.asarray(users)
        return ProfileSet(
            self.f_loc[idx],
            self.loads[idx],
            self.uplink_bits[idx],
            self.d_dl_bits[idx],
            self.p_ul[idx],
            self.raw_input_bits[idx],
        )

    def loads_at(self, m: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Cumulative load C_k^(m_k) for every UD."""
        m = np.asarray(m)
        return self.loads[np.arange(self.k_users), m - 1]

    def uplink_bits_at(self, m: npt.ArrayLike) -> npt.NDArray[np.float64]:
        m = np.asarray(m)
        return self.uplink_bits[np.arange(self.k_users), m - 1]


def stack_profiles(profiles: list[UDProfile]) -> ProfileSet:
    """Stack per-UD profiles, checking that they share the layer count."""
    if not profiles:
        raise ShapeError("need at least one profile")
    m = len(profiles[0].layer_loads)
    for p in profiles:
        if len(p.layer_loads) != m or len(p.layer_uplink_bits) != m:
            raise ShapeError("profiles disagree on the number of layers")
        if p.f_loc <= 0 or np.any(np.diff(p.layer_loads) <= 0) or p.layer_loads[0] <= 0:
            raise DomainError("profile needs f_loc > 0 and increasing positive loads")
    return ProfileSet(
        np.array([p.f_loc for p in profiles], dtype=np.float64),
        np.array([p.layer_loads for p in profiles], dtype=np.float64),
        np.array([p.layer_uplink_bits for p in profiles], dtype=np.float64),
        np.array([p.d_dl_bits for p in profiles], dtype=np.float64),
        np.array([p.p_ul for p in profiles], dtype=np.float64),
        np.array([p.raw_input_bits for p in profiles], dtype=np.float64),
    )


def generate_profiles(
    config: SystemConfig, rng: np.random.Generator | int
) -> ProfileSet:
    """
    Draw UD CPU speeds and per-layer loads from the configured uniform ranges.

    Loads are drawn per layer and accumulated, so C^(m) is strictly increasing.
    Rows are drawn in UD order, so the first K' UDs do not depend on K.
    """
    rng = np.random.default_rng(rng)
    k, m = config.k_users, config.m_layers
    params = config.profiles
    draws = rng.uniform(size=(k, m + 1))
    f_loc = params.f_loc_min_hz + draws[:, 0] * (
        params.f_loc_max_hz - params.f_loc_min_hz
    )
    per_layer = params.layer_load_min + draws[:, 1:] * (
        params.layer_load_max - params.layer_load_min
    )
    payload = config.payload.uplink_bits(m)
    return ProfileSet(
        f_loc,
        np.cumsum(per_layer, axis=1),
        np.tile(payload[1:], (k, 1)),
        np.full(k, config.payload.d_dl_bits),
        np.full(k, config.p_ul_w),
        np.full(k, payload[0]),
    )


@unique
class Placement(Enum):
    """
    Where the network runs.

    Values:
        SPLIT: Layers 1..m on the UD (or its DT), the rest at the AP.
        LOCAL: The whole network on the UD, no uplink.
        OFFLOAD: Raw input sent up, the whole network at the AP.
    """

    SPLIT = auto()
    LOCAL = auto()
    OFFLOAD = auto()


@dataclass(frozen=True)
class SolutionState:
    """
    The five decision blocks.

    Attributes:
        m: (K,) cut layers in 1..M.
        alpha: (K,) 1 when the UD computes locally, 0 when its DT does.
        delta_f: (K,) DT frequency offsets (cycles/s).
        v: (N_IRS,) unit-modulus IRS phases.
        p_ap: (K,) downlink powers (W).
        placement: Delay model the state is evaluated under.
    """

    m: npt.NDArray[np.int64]
    alpha: npt.NDArray[np.int64]
    delta_f: npt.NDArray[np.float64]
    v: npt.NDArray[np.complex128]
    p_ap: npt.NDArray[np.float64]
    placement: Placement = field(default=Placement.SPLIT)

    def replace(self, **changes) -> "SolutionState":
        return replace(self, **changes)


@dataclass(frozen=True)
class DelayBreakdown:
    t_dl: float
    t_ul: float
    t_comp: float
    t_total: float


@dataclass(frozen=True)
class DelayArrays:
    """Per-UD delay components, each of shape (K,)."""

    t_dl: npt.NDArray[np.float64]
    t_ul: npt.NDArray[np.float64]
    t_comp: npt.NDArray[np.float64]

    @property
    def t_total(self) -> npt.NDArray[np.float64]:
        return self.t_dl + self.t_ul + self.t_comp

    def breakdown(self, k: int) -> DelayBreakdown:
        t_dl, t_ul, t_comp = (
            float(self.t_dl[k]),
            float(self.t_ul[k]),
            float(self.t_comp[k]),
        )
        return DelayBreakdown(t_dl, t_ul, t_comp, t_dl + t_ul + t_comp)


def downlink_rate(p, gain, config: SystemConfig):
    """B * log2(1 + p * gain / noise) in bits/s."""
    rate = config.bandwidth_hz * np.log2(
        1.0 + np.asarray(p) * np.asarray(gain) / config.noise_w
    )
    return float(rate) if np.ndim(rate) == 0 else rate


def uplink_rate(p_ul, gain, config: SystemConfig):
    """Same Shannon rate as the downlink, evaluated with the uplink gain."""
    return downlink_rate(p_ul, gain, config)


def comm_delay(bits, rate):
    """bits / rate; infinite when the rate is zero and the payload is not."""
    bits_arr = np.asarray(bits, dtype=np.float64)
    rate_arr = np.asarray(rate, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(
            bits_arr == 0, 0.0, np.where(rate_arr > 0, bits_arr / rate_arr, math.inf)
        )
    return float(t) if np.ndim(t) == 0 else t


def compute_delay(profile: UDProfile, m: int, alpha: int, delta_f: float) -> float:
    """alpha * C/f_loc + (1 - alpha) * C/(f_loc + delta_f) with C = C^(m)."""
    load = profile.layer_loads[m - 1]
    if alpha:
        return float(load / profile.f_loc)
    return float(load / (profile.f_loc + delta_f))


def compute_delays(
    profiles: ProfileSet, m: npt.ArrayLike, alpha: npt.ArrayLike, delta_f: npt.ArrayLike
) -> npt.NDArray[np.float64]:
    """Vectorized compute_delay over all UDs."""
    loads = profiles.loads_at(m)
    speed = np.where(
        np.asarray(alpha) == 1, profiles.f_loc, profiles.f_loc + np.asarray(delta_f)
    )
    return loads / speed


def evaluate(
    config: SystemConfig, ch: ChannelSet, profiles: ProfileSet, sol: SolutionState
) -> DelayArrays:
    """
    Delay components of every UD under a solution.

    Returns:
        DelayArrays; zero rates give infinite components.
    """
    match sol.placement:
        case Placement.LOCAL:
            t_comp = profiles.loads[:, -1] / profiles.f_loc
            t_ul = np.zeros(profiles.k_users)
            if ch.direct_link:
                assert ch.h_direct is not None
                gain = np.sum(np.abs(ch.h_direct) ** 2, axis=1)
                t_dl = comm_delay(
                    profiles.d_dl_bits, downlink_rate(sol.p_ap, gain, config)
                )
            else:
                t_dl = np.zeros(profiles.k_users)
            return DelayArrays(t_dl, t_ul, t_comp)
        case Placement.OFFLOAD:
            ul_bits = profiles.raw_input_bits
            t_comp = profiles.loads[:, -1] / config.f_ap_hz
        case Placement.SPLIT:
            ul_bits = profiles.uplink_bits_at(sol.m)
            t_comp = compute_delays(profiles, sol.m, sol.alpha, sol.delta_f)
    g_dl = downlink_gains(ch, sol.v)
    g_ul = uplink_gains(ch, sol.v)
    t_dl = comm_delay(profiles.d_dl_bits, downlink_rate(sol.p_ap, g_dl, config))
    t_ul = comm_delay(ul_bits, uplink_rate(profiles.p_ul, g_ul, config))
    return DelayArrays(np.asarray(t_dl), np.asarray(t_ul), t_comp)


def total_delay(
    config: SystemConfig,
    ch: ChannelSet,
    profile: UDProfile | ProfileSet,
    sol: SolutionState,
    k: int,
) -> DelayBreakdown:
    """Delay breakdown of UD k."""
    if isinstance(profile, UDProfile):
        if ch.k_users != 1:
            ch = ch.subset([k])
        profiles = stack_profiles([profile])
        sub = sol.replace(
            m=sol.m[[k]],
            alpha=sol.alpha[[k]],
            delta_f=sol.delta_f[[k]],
            p_ap=sol.p_ap[[k]],
        )
        return evaluate(config, ch, profiles, sub).breakdown(0)
    return evaluate(config, ch, profile, sol).breakdown(k)


def mean_loss(m: npt.ArrayLike, table: npt.ArrayLike) -> float:
    """
    Average surrogate training loss (1/K) * sum_k L(m_k).

    Args:
        m: Cut layers in 1..M.
        table: Loss per cut, index 0 is cut 1.

    Raises:
        DomainError: If a cut lies outside 1..M.
    """
    m = np.asarray(m)
    table = np.asarray(table, dtype=np.float64)
    if np.any(m < 1) or np.any(m > len(table)):
        raise DomainError(f"cut layers must lie in 1..{len(table)}")
    return float(np.mean(table[m - 1]))


def objective(
    config: SystemConfig, ch: ChannelSet, profiles: ProfileSet, sol: SolutionState
) -> float:
    """J = sum_k T_k^total + lambda * surrogate loss."""
    delays = evaluate(config, ch, profiles, sol)
    return objective_from(config, delays, sol)


def objective_from(
    config: SystemConfig, delays: DelayArrays, sol: SolutionState
) -> float:
    """J from already evaluated delays."""
    loss = mean_loss(sol.m, config.loss_profile.table(config.m_layers))
    return float(np.sum(delays.t_total)) + config.lambda_weight * loss


@dataclass(frozen=True)
class Violation:
    """
    A violated constraint.

    Attributes:
        constraint: Constraint number in the problem formulation.
        k: Offending UD, or None for a global constraint.
        residual: Amount by which the constraint is exceeded.
    """

    constraint: int
    k: int | None
    residual: float


def audit_constraints(
    config: SystemConfig, ch: ChannelSet, profiles: ProfileSet, sol: SolutionState
) -> list[Violation]:
    """
    Check a solution against every constraint of the problem.

    Covered: cut range (19), binary activation (20), power budget (21), power
    box (22), per-UD frequency box (23), finite phases (24), uplink rate floor
    (25), compute delay of every UD, on its own CPU or on its twin, within the
    delay threshold (26), unit modulus (27), global DT frequency budget (31), no
    offset for local UDs (36) and finite total delay (9).

    Returns:
        One Violation per failing (constraint, UD) pair; empty iff feasible.
    """
    out: list[Violation] = []

    def flag(constraint: int, mask, residual) -> None:
        residual = np.broadcast_to(np.asarray(residual, dtype=np.float64), mask.shape)
        for k in np.flatnonzero(mask):
            out.append(Violation(constraint, int(k), float(residual[k])))

    m = np.asarray(sol.m)
    m_layers = config.m_layers
    m_bad = (m < 1) | (m > m_layers) | (np.round(m) != m)
    flag(19, m_bad, np.maximum(1 - m, m - m_layers))
    alpha = np.asarray(sol.alpha)
    flag(20, (alpha != 0) & (alpha != 1), np.minimum(np.abs(alpha), np.abs(alpha - 1)))
    p = np.asarray(sol.p_ap, dtype=np.float64)
    excess = float(np.sum(p)) - config.p_total_w
    if excess > power_budget_slack * max(1.0, config.p_total_w):
        out.append(Violation(21, None, excess))
    box = np.maximum(-p, p - config.p_max_w)
    flag(22, box > power_budget_slack * max(1.0, config.p_max_w), box)
    df = np.asarray(sol.delta_f, dtype=np.float64)
    df_box = np.maximum(-df, df - config.delta_f_max_hz)
    flag(23, df_box > dt_budget_slack * config.delta_f_max_hz, df_box)
    v = np.asarray(sol.v)
    flag(24, ~np.isfinite(v), math.inf)
    modulus = np.abs(np.abs(v) - 1.0)
    flag(27, modulus > unit_modulus_tol, modulus)
    if sol.placement != Placement.LOCAL:
        rate = np.asarray(
            uplink_rate(profiles.p_ul, uplink_gains(ch, v), config), dtype=np.float64
        )
        flag(25, rate < config.r_min_bps, config.r_min_bps - rate)
    if sol.placement != Placement.OFFLOAD:
        cut = np.clip(m, 1, m_layers).astype(np.int64)
        if sol.placement == Placement.LOCAL:
            cut = np.full_like(cut, m_layers)
        speed = profiles.f_loc + np.where(alpha == 0, df, 0.0)
        over = profiles.loads_at(cut) / speed - config.t_max_s
        flag(26, over > 1e-12 * config.t_max_s, over)
    dt_sum = float(np.sum(np.where(alpha == 0, df, 0.0)))
    if dt_sum > config.delta_f_max_hz * (1 + dt_budget_slack):
        out.append(Violation(31, None, dt_sum - config.delta_f_max_hz))
    flag(36, (alpha == 1) & (df != 0), np.abs(df))
    if not np.any(m_bad):
        t_total = evaluate(config, ch, profiles, sol).t_total
        flag(9, ~np.isfinite(t_total), math.inf)
    return out
