"""
Scenario module for DT-IRS-Bench.

Builds the geometry, UD profiles, and channel realization of one seeded
experiment. Each stochastic part draws from its own child of the seed, so
sweeping the IRS size or the UD count keeps positions and profiles fixed.
"""

from dataclasses import dataclass

import numpy as np

from dtirs_bench.src.channel import (
    ChannelSet,
    Geometry,
    generate_channels,
    generate_geometry,
)
from dtirs_bench.src.config import SystemConfig
from dtirs_bench.src.delay import ProfileSet, generate_profiles


@dataclass(frozen=True)
class Scenario:
    """
    Attributes:
        config: Scenario parameters.
        geometry: Node positions.
        channels: Channel realization.
        profiles: UD compute and payload profiles.
        seed: Master seed.
        solver_seed: Seed for the optimizers' own randomness.
    """

    config: SystemConfig
    geometry: Geometry
    channels: ChannelSet
    profiles: ProfileSet
    seed: int
    solver_seed: int


def build_scenario(config: SystemConfig, seed: int) -> Scenario:
    """Draw a scenario; identical (config, seed) give identical scenarios."""
    geo_seq, profile_seq, fading_seq, solver_seq = np.random.SeedSequence(seed).spawn(4)
    geometry = generate_geometry(config, np.random.default_rng(geo_seq))
    profiles = generate_profiles(config, np.random.default_rng(profile_seq))
    channels = generate_channels(config, geometry, np.random.default_rng(fading_seq))
    solver_seed = int(solver_seq.generate_state(1)[0])
    return Scenario(config, geometry, channels, profiles, seed, solver_seed)
