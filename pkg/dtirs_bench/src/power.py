"""
Downlink power module for DT-IRS-Bench.

Minimizes the total downlink delay sum_k c_k / ln(1 + a_k p_k) under a total
power budget and a per-user box. The stationary point of each user is closed
form through the Lambert W function; the budget multiplier is found by
bisection.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from dtirs_bench.src.channel import ChannelSet, downlink_gains
from dtirs_bench.src.config import SystemConfig
from dtirs_bench.src.delay import ProfileSet
from dtirs_bench.src.numerics import BisectionSpec, bisect, lambert_w0
from dtirs_bench.src.utils import ConvergenceError, DomainError, InfeasibleError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PowerInstance:
    """
    Attributes:
        a: (K,) channel factors gain_k / noise (1/W).
        c: (K,) delay factors D_DL,k * ln 2 / B (s).
        p_total: Total budget (W).
        p_max: Per-user cap (W).
        p_min: (K,) optional per-user floors (W).
    """

    a: npt.NDArray[np.float64]
    c: npt.NDArray[np.float64]
    p_total: float
    p_max: float
    p_min: npt.NDArray[np.float64] | None = None

    def __post_init__(self):
        if self.p_total <= 0 or self.p_max <= 0:
            raise DomainError("power budget and cap must be positive")
        if np.any(self.a < 0) or np.any(self.c < 0):
            raise DomainError("channel and delay factors must be nonnegative")

    @property
    def k_users(self) -> int:
        return self.a.shape[0]

    def delay(self, p: npt.ArrayLike) -> float:
        """Total downlink delay sum_k c_k / ln(1 + a_k p_k)."""
        p = np.asarray(p, dtype=np.float64)
        with np.errstate(divide="ignore"):
            terms = np.where(self.c == 0, 0.0, self.c / np.log1p(self.a * p))
        return float(np.sum(terms))

    def stationarity(self, p: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """c_k a_k / ((1 + a_k p_k) ln^2(1 + a_k p_k)), the marginal delay gain."""
        p = np.asarray(p, dtype=np.float64)
        x = np.log1p(self.a * p)
        return self.c * self.a / ((1 + self.a * p) * x**2)


def power_instance(
    config: SystemConfig,
    ch: ChannelSet,
    profiles: ProfileSet,
    v: npt.ArrayLike,
    p_min: npt.ArrayLike | None = None,
) -> PowerInstance:
    """Build the allocation instance seen by the downlink under phases v."""
    a = downlink_gains(ch, v) / config.noise_w
    c = profiles.d_dl_bits * math.log(2) / config.bandwidth_hz
    floor = None if p_min is None else np.asarray(p_min, dtype=np.float64)
    return PowerInstance(a, c, config.p_total_w, config.p_max_w, floor)


def min_rate_floor(
    config: SystemConfig, a: npt.NDArray[np.float64], rate: float | None = None
) -> npt.NDArray[np.float64]:
    """Power floors (2^(R/B) - 1) / a_k that guarantee a downlink rate R."""
    rate = config.r_min_bps if rate is None else rate
    gap = math.expm1(rate / config.bandwidth_hz * math.log(2))
    with np.errstate(divide="ignore"):
        return np.where(a > 0, gap / a, np.inf)


def interior_power(inst: PowerInstance, k: int, nu: float) -> float:
    """
    Stationary power of user k for multiplier nu.

    P = (exp(2 W(z)) - 1) / a_k with z = sqrt(c_k a_k / nu) / 2, which equals
    ((z / W(z))^2 - 1) / a_k.
    """
    return float(_interior(inst.a[[k]], inst.c[[k]], nu)[0])


def _interior(
    a: npt.NDArray[np.float64], c: npt.NDArray[np.float64], nu: float
) -> npt.NDArray[np.float64]:
    if nu <= 0:
        raise DomainError("multiplier must be positive")
    z = 0.5 * np.sqrt(c * a / nu)
    w = np.asarray(lambert_w0(z))
    return np.expm1(2.0 * w) / a


def allocate_power(
    inst: PowerInstance, spec: BisectionSpec | None = None
) -> npt.NDArray[np.float64]:
    """
    Optimal downlink powers.

    Users with a_k = 0 or c_k = 0 get no power. When every remaining user can
    sit at its cap within the budget they all do; otherwise the multiplier is
    bisected on log(nu) until the clipped stationary powers use the budget.

    Args:
        inst: Allocation instance.
        spec: Tolerances and iteration cap; the bracket is derived from the
            instance.

    Returns:
        (K,) powers.

    Raises:
        InfeasibleError: If the floors exceed the cap or the budget.
        ConvergenceError: If bisection hits its cap; ``best`` is the allocation
            at the best multiplier, scaled into the budget.
    """
    k_users = inst.k_users
    p = np.zeros(k_users)
    floor = np.zeros(k_users) if inst.p_min is None else inst.p_min
    active = (inst.a > 0) & (inst.c > 0)
    if np.any(~active & (inst.a == 0)):
        logger.warning(
            "users %s have zero downlink gain and get no power",
            np.flatnonzero(~active & (inst.a == 0)).tolist(),
        )
    if np.any(floor[active] > inst.p_max):
        raise InfeasibleError(
            "power floor above the per-user cap",
            {"users": np.flatnonzero(active & (floor > inst.p_max)).tolist()},
        )
    if float(np.sum(floor[active])) > inst.p_total:
        raise InfeasibleError(
            "power floors exceed the total budget",
            {"floor_sum": float(np.sum(floor[active])), "p_total": inst.p_total},
        )
    idx = np.flatnonzero(active)
    if idx.size == 0:
        return p
    if idx.size * inst.p_max <= inst.p_total:
        p[idx] = inst.p_max
        return p
    a, c, lo_p = inst.a[idx], inst.c[idx], floor[idx]

    def powers(log_nu: float) -> npt.NDArray[np.float64]:
        return np.clip(_interior(a, c, math.exp(log_nu)), lo_p, inst.p_max)

    def budget_residual(log_nu: float) -> float:
        return float(np.sum(powers(log_nu))) / inst.p_total - 1.0

    p_small = 1e-12 * inst.p_total
    x_small = np.log1p(a * p_small)
    x_cap = np.log1p(a * inst.p_max)
    with np.errstate(divide="ignore"):
        nu_hi = float(np.max(c * a / ((1 + a * p_small) * x_small**2)))
    nu_hi = min(nu_hi, float(np.finfo(np.float64).max))
    nu_lo = float(np.min(c * a / ((1 + a * inst.p_max) * x_cap**2)))
    lo, hi = math.log(nu_lo) - 1.0, min(math.log(nu_hi) + 1.0, 700.0)
    spec = spec or BisectionSpec(lo, hi)
    spec = dataclasses.replace(spec, lo=lo, hi=hi)
    try:
        log_nu = bisect(budget_residual, spec)
    except ConvergenceError as e:
        assert isinstance(e.best, float)
        p[idx] = _fit_budget(powers(e.best), lo_p, inst.p_total)
        raise ConvergenceError(str(e), p) from e
    p[idx] = _fit_budget(powers(log_nu), lo_p, inst.p_total)
    return p


def _fit_budget(
    p: npt.NDArray[np.float64], floor: npt.NDArray[np.float64], p_total: float
) -> npt.NDArray[np.float64]:
    # shrink the part above the floors when bisection stopped on the wrong side
    total = float(np.sum(p))
    if total <= p_total:
        return p
    spare = p - floor
    return floor + spare * ((p_total - float(np.sum(floor))) / float(np.sum(spare)))
