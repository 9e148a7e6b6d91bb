"""Shared fixtures for DT-IRS-Bench unit tests."""

import numpy as np
import pytest

from dtirs_bench.src.channel import ChannelSet, uplink_gains
from dtirs_bench.src.config import GaParams, SolverParams, SystemConfig
from dtirs_bench.src.delay import SolutionState, UDProfile, stack_profiles, uplink_rate
from dtirs_bench.src.scenario import build_scenario


@pytest.fixture
def toy_config():
    """Four UDs, four layers, a 2-antenna AP and a 4-element IRS."""
    return SystemConfig(
        k_users=4,
        m_layers=4,
        n_ap=2,
        n_irs=4,
        solver=SolverParams(max_iter=10, n_rand=50),
        ga=GaParams(population=10, generations=8),
    )


@pytest.fixture
def toy_scenario(toy_config):
    return build_scenario(toy_config, 0)


@pytest.fixture
def unit_channel():
    """Single-antenna AP, single UD, two IRS elements with unit coefficients."""
    g = np.ones((2, 1), dtype=np.complex128)
    h = np.ones((1, 2), dtype=np.complex128)
    return ChannelSet(g, h, g)


def _random_channel(
    rng: np.random.Generator, k: int, n_irs: int, n_ap: int, direct_link: bool = False
) -> ChannelSet:
    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(
            2
        )

    g = cn(n_irs, n_ap)
    return ChannelSet(g, cn(k, n_irs), g, cn(k, n_ap), direct_link)


@pytest.fixture
def make_channel():
    """Factory for unit-variance Rayleigh channels with reciprocity."""
    return _random_channel


@pytest.fixture
def two_layer_profiles():
    """Two UDs with hand-picked loads and payloads."""
    return stack_profiles(
        [
            UDProfile(
                f_loc=1e9,
                layer_loads=np.array([1e9, 3e9]),
                layer_uplink_bits=np.array([4e6, 1e6]),
                d_dl_bits=1e6,
                p_ul=0.1,
                raw_input_bits=8e6,
            ),
            UDProfile(
                f_loc=2e9,
                layer_loads=np.array([2e9, 5e9]),
                layer_uplink_bits=np.array([4e6, 1e6]),
                d_dl_bits=1e6,
                p_ul=0.1,
                raw_input_bits=8e6,
            ),
        ]
    )


@pytest.fixture
def twin_instance():
    """
    One UD whose deeper cut only pays off once its twin holds the AP budget.

    Local compute takes 0.5 s at cut 1 and 1.5 s at cut 2 against a 1 s
    threshold; the upload takes 1.2 s at cut 1 and 0.5 s at cut 2.
    """
    config = SystemConfig(
        k_users=1,
        m_layers=2,
        n_ap=1,
        n_irs=1,
        t_max_s=1.0,
        delta_f_max_hz=1e9,
        lambda_weight=0.0,
    )
    g = np.ones((1, 1), dtype=np.complex128)
    ch = ChannelSet(g, g, g)
    rate = float(uplink_rate(0.1, uplink_gains(ch, np.ones(1))[0], config))
    profiles = stack_profiles(
        [
            UDProfile(
                f_loc=1e9,
                layer_loads=np.array([0.5e9, 1.5e9]),
                layer_uplink_bits=np.array([1.2, 0.5]) * rate,
                d_dl_bits=1e6,
                p_ul=0.1,
                raw_input_bits=1e7,
            )
        ]
    )
    state = SolutionState(
        m=np.array([1]),
        alpha=np.array([1]),
        delta_f=np.zeros(1),
        v=np.ones(1, dtype=np.complex128),
        p_ap=np.array([1.0]),
    )
    return config, ch, profiles, state
