"""
Scenario configuration module for DT-IRS-Bench.

Defines the frozen dataclasses holding every scenario parameter, their
defaults, and TOML loading/dumping with validation that reports every
offending key at once.
"""

import dataclasses
import math
import sys
from dataclasses import dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np
import numpy.typing as npt
import tomli_w

from dtirs_bench.src.utils import ConfigError


@dataclass(frozen=True)
class PathLossParams:
    """Large-scale fading PL(d) = c0 * (d / d0) ** -alpha per link type."""

    c0: float = 1e-3
    d0: float = 1.0
    alpha_ap_irs: float = 2.2
    alpha_irs_ud: float = 2.8
    alpha_direct: float = 3.5


@dataclass(frozen=True)
class GeometryParams:
    """
    Node placement in the plane (meters).

    UDs are dropped uniformly in a square of side ``ud_side`` centred on
    ``ud_center`` unless ``ud_positions`` lists them explicitly.
    """

    ap_position: tuple[float, float] = (0.0, 0.0)
    irs_position: tuple[float, float] = (50.0, 10.0)
    ud_center: tuple[float, float] = (60.0, 0.0)
    ud_side: float = 20.0
    ud_positions: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class ProfileParams:
    """Ranges of the uniform draws for UD CPU speed and per-layer load."""

    f_loc_min_hz: float = 5e9
    f_loc_max_hz: float = 12e9
    layer_load_min: float = 0.5e9
    layer_load_max: float = 1.5e9


@dataclass(frozen=True)
class PayloadParams:
    """
    Activation and model payload sizes.

    The uplink payload at cut m is ``bits_per_element * width0 * decay**m``;
    cut 0 is the raw input sent by full offloading.
    """

    bits_per_element: float = 32.0
    width0: float = 1e6
    decay: float = 0.8
    d_dl_bits: float = 1e6

    def uplink_bits(self, m_layers: int) -> npt.NDArray[np.float64]:
        """Uplink payload for cuts 0..m_layers (index = cut layer)."""
        cuts = np.arange(m_layers + 1, dtype=np.float64)
        return self.bits_per_element * self.width0 * self.decay**cuts


@dataclass(frozen=True)
class LossProfile:
    """
    Surrogate training loss per cut layer.

    ``values`` overrides the exponential default ``scale * exp(-decay * m)``.
    """

    scale: float = 0.5
    decay: float = 0.3
    values: tuple[float, ...] = ()

    def table(self, m_layers: int) -> npt.NDArray[np.float64]:
        """Loss for cuts 1..m_layers (index 0 is cut 1)."""
        if self.values:
            return np.asarray(self.values, dtype=np.float64)
        return self.scale * np.exp(-self.decay * np.arange(1, m_layers + 1))


@dataclass(frozen=True)
class SolverParams:
    max_iter: int = 25
    eps_conv: float = 1e-4
    n_rand: int = 100
    sdp_tol: float = 1e-7
    sdp_max_iter: int = 200
    bisect_tol: float = 1e-12
    bisect_max_iter: int = 200


@dataclass(frozen=True)
class GaParams:
    population: int = 40
    generations: int = 60
    crossover_rate: float = 0.8
    mutation_rate: float = 0.05
    tournament_size: int = 3


@dataclass(frozen=True)
class AdmmParams:
    rho: float = 1.0
    max_iter: int = 100
    tol: float = 1e-4


@dataclass(frozen=True)
class Flags:
    reciprocity: bool = True
    direct_link: bool = False


@dataclass(frozen=True)
class SystemConfig:
    """
    All parameters of a scenario.

    Scalars are in SI units (Hz, W, s, bits). ``kappa`` is carried for
    completeness and does not enter the objective.
    """

    k_users: int = 100
    m_layers: int = 12
    n_ap: int = 32
    n_irs: int = 32
    bandwidth_hz: float = 1e8
    noise_w: float = 1e-11
    p_total_w: float = 3.0
    p_max_w: float = 3.0
    p_ul_w: float = 0.1
    delta_f_max_hz: float = 1e10
    t_max_s: float = 2.0
    r_min_bps: float = 5e3
    lambda_weight: float = 1.0
    kappa: float = 1e-28
    f_ap_hz: float = 5e10
    loss_profile: LossProfile = field(default_factory=LossProfile)
    path_loss: PathLossParams = field(default_factory=PathLossParams)
    geometry: GeometryParams = field(default_factory=GeometryParams)
    profiles: ProfileParams = field(default_factory=ProfileParams)
    payload: PayloadParams = field(default_factory=PayloadParams)
    solver: SolverParams = field(default_factory=SolverParams)
    ga: GaParams = field(default_factory=GaParams)
    admm: AdmmParams = field(default_factory=AdmmParams)
    flags: Flags = field(default_factory=Flags)

    def replace(self, **changes: Any) -> "SystemConfig":
        """Return a copy with top-level fields replaced."""
        return dataclasses.replace(self, **changes)


# keys that may be zero; every other numeric key must be strictly positive
_NONNEGATIVE = {
    "lambda_weight",
    "kappa",
    "r_min_bps",
    "path_loss.c0",
    "loss_profile.scale",
    "loss_profile.decay",
    "ga.crossover_rate",
    "ga.mutation_rate",
}
_UNIT_INTERVAL = {"ga.crossover_rate", "ga.mutation_rate"}
_POSITION_KEYS = {"ap_position", "irs_position", "ud_center"}


def _build(cls: type, data: dict[str, Any], prefix: str, errors: list[str]) -> Any:
    kwargs: dict[str, Any] = {}
    known = {f.name: f for f in fields(cls)}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if key not in known:
            errors.append(f"{dotted}: unknown key")
            continue
        default = getattr(cls(), key)
        if is_dataclass(default):
            if not isinstance(value, dict):
                errors.append(f"{dotted}: expected a table")
                continue
            kwargs[key] = _build(type(default), value, f"{dotted}.", errors)
        else:
            kwargs[key] = _coerce(value, default, dotted, errors)
    return cls(**kwargs)


def _coerce(value: Any, default: Any, dotted: str, errors: list[str]) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            errors.append(f"{dotted}: expected a boolean")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{dotted}: expected an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{dotted}: expected a number")
            return value
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, list):
            errors.append(f"{dotted}: expected an array")
            return value
        if dotted.endswith("ud_positions"):
            return tuple(tuple(float(x) for x in point) for point in value)
        return tuple(float(x) for x in value)
    return value


def _validate(config: SystemConfig) -> list[str]:
    errors: list[str] = []

    def walk(obj: Any, prefix: str) -> None:
        for f in fields(obj):
            value = getattr(obj, f.name)
            dotted = f"{prefix}{f.name}"
            if is_dataclass(value):
                walk(value, f"{dotted}.")
            elif isinstance(value, bool):
                continue
            elif isinstance(value, (int, float)):
                if not math.isfinite(value):
                    errors.append(f"{dotted}: must be finite")
                elif dotted in _NONNEGATIVE:
                    if value < 0:
                        errors.append(f"{dotted}: must be >= 0")
                elif value <= 0:
                    errors.append(f"{dotted}: must be > 0")
                if dotted in _UNIT_INTERVAL and value > 1:
                    errors.append(f"{dotted}: must be <= 1")
            elif f.name in _POSITION_KEYS and len(value) != 2:
                errors.append(f"{dotted}: expected two coordinates")

    walk(config, "")
    geometry = config.geometry
    if geometry.ud_positions:
        if len(geometry.ud_positions) < config.k_users:
            errors.append("geometry.ud_positions: fewer points than k_users")
        if any(len(p) != 2 for p in geometry.ud_positions):
            errors.append("geometry.ud_positions: expected two coordinates per UD")
    if geometry.ap_position == geometry.irs_position:
        errors.append("geometry.irs_position: coincides with ap_position")
    profile = config.loss_profile
    if profile.values:
        if len(profile.values) != config.m_layers:
            errors.append("loss_profile.values: length must equal m_layers")
        if any(v < 0 or not math.isfinite(v) for v in profile.values):
            errors.append("loss_profile.values: entries must be finite and >= 0")
    if config.profiles.f_loc_min_hz > config.profiles.f_loc_max_hz:
        errors.append("profiles.f_loc_min_hz: exceeds f_loc_max_hz")
    if config.profiles.layer_load_min > config.profiles.layer_load_max:
        errors.append("profiles.layer_load_min: exceeds layer_load_max")
    if config.ga.population < 2:
        errors.append("ga.population: must be >= 2")
    return errors


def config_from_dict(data: dict[str, Any]) -> SystemConfig:
    """
    Build and validate a config from a nested mapping.

    Args:
        data: Mapping as produced by a TOML parser; absent keys keep defaults.

    Returns:
        Validated SystemConfig.

    Raises:
        ConfigError: Listing every unknown, mistyped, or out-of-range key.
    """
    errors: list[str] = []
    config = _build(SystemConfig, data, "", errors)
    if not errors:
        errors = _validate(config)
    if errors:
        raise ConfigError(errors)
    return config


def load_config(path: str | Path | None) -> SystemConfig:
    """
    Load a scenario file.

    Args:
        path: TOML file path; None gives the default scenario.

    Returns:
        Validated SystemConfig with defaults filled in for absent keys.

    Raises:
        ConfigError: On a missing file, syntax errors (with line and column) or
            invalid values.
    """
    if path is None:
        return config_from_dict({})
    try:
        with Path(path).open("rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"{path}: {e}"]) from e
    except FileNotFoundError as e:
        raise ConfigError([f"{path}: no such file"]) from e
    return config_from_dict(data)


def config_to_dict(config: SystemConfig) -> dict[str, Any]:
    """Nested plain-data view of a config, suitable for TOML or JSON."""

    def convert(value: Any) -> Any:
        if isinstance(value, tuple):
            return [convert(v) for v in value]
        return value

    def walk(obj: Any) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(obj):
            value = getattr(obj, f.name)
            out[f.name] = walk(value) if is_dataclass(value) else convert(value)
        return out

    return walk(config)


def dump_config(config: SystemConfig, path: str | Path) -> None:
    """Write every key of a config so that loading it back is the identity."""
    with Path(path).open("wb") as f:
        tomli_w.dump(config_to_dict(config), f)
