"""
Digital-twin module for DT-IRS-Bench.

Decides which UDs hand their local layers to a digital twin at the AP and
splits the AP's spare CPU budget among those twins.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from dtirs_bench.src.config import SystemConfig
from dtirs_bench.src.delay import ProfileSet
from dtirs_bench.src.numerics import BisectionSpec, bisect
from dtirs_bench.src.utils import ConvergenceError, DomainError

lambda_floor = 1e-30


@dataclass(frozen=True)
class DtBudget:
    """
    Attributes:
        delta_f_max: Total extra CPU frequency the AP can lend (cycles/s).
        t_max: Local compute time above which a UD is handed to its twin (s).
    """

    delta_f_max: float
    t_max: float

    def __post_init__(self):
        if self.delta_f_max <= 0 or self.t_max <= 0:
            raise DomainError("DT budget and threshold must be positive")

    @classmethod
    def from_config(cls, config: SystemConfig) -> "DtBudget":
        return cls(config.delta_f_max_hz, config.t_max_s)


def decide_activation(
    profiles: ProfileSet, m: npt.ArrayLike, budget: DtBudget
) -> npt.NDArray[np.int64]:
    """
    Threshold rule for local execution.

    alpha_k = 1 iff f_k >= C_k^(m_k) / T_max, so a UD whose local layers would
    take longer than T_max is served by its twin (alpha_k = 0).
    """
    loads = profiles.loads_at(m)
    return (profiles.f_loc >= loads / budget.t_max).astype(np.int64)


def allocate_frequency_offsets(
    profiles: ProfileSet,
    m: npt.ArrayLike,
    alpha: npt.ArrayLike,
    budget: DtBudget,
    spec: BisectionSpec | None = None,
) -> npt.NDArray[np.float64]:
    """
    Split the AP frequency budget among the twins.

    Minimizes sum_k C_k / (f_k + df_k) over twin UDs subject to
    sum_k df_k <= delta_f_max. The KKT point is
    df_k = max(sqrt(C_k / lam) - f_k, 0) with lam found by bisection on
    log(lam) so the budget is used exactly.

    Args:
        profiles: UD profiles.
        m: Current cut layers.
        alpha: Activation vector; UDs with alpha_k = 1 get no offset.
        budget: Budget and threshold.
        spec: Tolerances and iteration cap; its bracket is replaced by
            [log(1e-30), log(max_k C_k / f_k^2)].

    Returns:
        (K,) frequency offsets.

    Raises:
        ConvergenceError: If the bisection hits its cap; ``best`` holds the
            offsets at the best multiplier found, scaled into the budget.
    """
    alpha = np.asarray(alpha)
    delta_f = np.zeros(profiles.k_users)
    twins = np.flatnonzero(alpha == 0)
    if twins.size == 0:
        return delta_f
    loads = profiles.loads_at(m)[twins]
    f = profiles.f_loc[twins]

    def offsets(log_lam: float) -> npt.NDArray[np.float64]:
        return np.maximum(np.sqrt(loads / math.exp(log_lam)) - f, 0.0)

    def budget_residual(log_lam: float) -> float:
        return float(np.sum(offsets(log_lam))) / budget.delta_f_max - 1.0

    hi = math.log(float(np.max(loads / f**2)))
    lo = min(math.log(lambda_floor), hi - 1.0)
    spec = spec or BisectionSpec(lo, hi)
    spec = dataclasses.replace(spec, lo=lo, hi=hi)
    if budget_residual(lo) <= 0:
        # the budget exceeds what even the smallest multiplier asks for
        log_lam = lo
    else:
        try:
            log_lam = bisect(budget_residual, spec)
        except ConvergenceError as e:
            assert isinstance(e.best, float)
            delta_f[twins] = _fit_budget(offsets(e.best), budget.delta_f_max)
            raise ConvergenceError(str(e), delta_f) from e
    delta_f[twins] = _fit_budget(offsets(log_lam), budget.delta_f_max)
    return delta_f


def _fit_budget(
    offsets: npt.NDArray[np.float64], delta_f_max: float
) -> npt.NDArray[np.float64]:
    total = float(np.sum(offsets))
    if total > delta_f_max:
        return offsets * (delta_f_max / total)
    return offsets


def twin_compute_delay(
    profiles: ProfileSet, m: npt.ArrayLike, delta_f: npt.ArrayLike
) -> npt.NDArray[np.float64]:
    """C_k^(m_k) / (f_k + df_k) for every UD."""
    return profiles.loads_at(m) / (profiles.f_loc + np.asarray(delta_f))


def offset_multiplier(
    profiles: ProfileSet, m: npt.ArrayLike, delta_f: npt.ArrayLike
) -> float | None:
    """
    Shared KKT multiplier C_k / (f_k + df_k)^2 of the funded twins.

    Returns:
        The multiplier, or None when no twin holds a positive offset.
    """
    delta_f = np.asarray(delta_f, dtype=np.float64)
    funded = np.flatnonzero(delta_f > 0)
    if funded.size == 0:
        return None
    speed = profiles.f_loc[funded] + delta_f[funded]
    return float(np.mean(profiles.loads_at(m)[funded] / speed**2))


def offsets_at_price(
    profiles: ProfileSet, lam: float, budget: DtBudget
) -> npt.NDArray[np.float64]:
    """
    Offset every (UD, cut) pair would receive at multiplier ``lam``, shape (K, M).

    This is the closed-form KKT response max(sqrt(C_k^(m) / lam) - f_k, 0),
    capped at the whole budget.
    """
    assert lam > 0
    f = profiles.f_loc[:, None]
    response = np.sqrt(profiles.loads / lam) - f
    return np.clip(response, 0.0, budget.delta_f_max)


def price_range(profiles: ProfileSet, budget: DtBudget) -> tuple[float, float] | None:
    """
    Multipliers spanning every useful twin offset.

    The upper end funds nobody; the lower end lets the hungriest eligible
    (UD, cut) pair absorb the whole budget. None when no pair is eligible.
    """
    f = profiles.f_loc[:, None]
    eligible = f < profiles.loads / budget.t_max
    if not np.any(eligible):
        return None
    loads = profiles.loads[eligible]
    f_eligible = np.broadcast_to(f, profiles.loads.shape)[eligible]
    hi = float(np.max(loads / f_eligible**2))
    lo = float(np.min(loads / (f_eligible + budget.delta_f_max) ** 2))
    return lo, hi
