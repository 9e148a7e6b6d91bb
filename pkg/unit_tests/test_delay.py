"""Unit tests for dtirs_bench.src.delay."""

import math

import numpy as np
import pytest

from dtirs_bench.src.channel import ChannelSet
from dtirs_bench.src.config import SystemConfig
from dtirs_bench.src.delay import (
    Placement,
    SolutionState,
    UDProfile,
    audit_constraints,
    comm_delay,
    compute_delay,
    compute_delays,
    downlink_rate,
    evaluate,
    generate_profiles,
    mean_loss,
    objective,
    stack_profiles,
    total_delay,
    uplink_rate,
)
from dtirs_bench.src.utils import DomainError, ShapeError


@pytest.fixture
def small_config():
    return SystemConfig(
        k_users=2,
        m_layers=2,
        n_ap=1,
        n_irs=2,
        bandwidth_hz=1e6,
        noise_w=1.0,
        p_ul_w=0.1,
        delta_f_max_hz=1e9,
        t_max_s=2.0,
        r_min_bps=1.0,
        lambda_weight=0.0,
    )


@pytest.fixture
def small_channel():
    g = np.ones((2, 1), dtype=np.complex128)
    return ChannelSet(g, np.ones((2, 2), dtype=np.complex128), g)


@pytest.fixture
def small_state():
    return SolutionState(
        m=np.array([1, 2]),
        alpha=np.array([1, 0]),
        delta_f=np.array([0.0, 0.5e9]),
        v=np.ones(2, dtype=np.complex128),
        p_ap=np.array([0.75, 0.75]),
    )


class TestRates:
    def test_downlink(self):
        assert downlink_rate(0.0, 1.0, SystemConfig()) == 0.0
        config = SystemConfig(bandwidth_hz=1e6, noise_w=1.0)
        assert downlink_rate(3.0, 1.0, config) == pytest.approx(2e6)
        config = SystemConfig(bandwidth_hz=1.0, noise_w=1.0)
        assert downlink_rate(1.0, 1.0, config) == pytest.approx(1.0)

    def test_uplink(self):
        config = SystemConfig(bandwidth_hz=2.0, noise_w=1.0)
        assert uplink_rate(7.0, 1.0, config) == pytest.approx(6.0)
        assert uplink_rate(0.0, 1.0, config) == 0.0

    def test_comm_delay(self):
        assert comm_delay(1e6, 1e6) == pytest.approx(1.0)
        assert comm_delay(5e5, 2e6) == pytest.approx(0.25)
        assert comm_delay(1e6, 0.0) == math.inf
        assert comm_delay(0.0, 0.0) == 0.0


class TestMonotonicity:
    powers = np.geomspace(1e-3, 1e3, 25)
    gains = np.geomspace(1e-12, 1.0, 25)

    @pytest.mark.parametrize("rate", [downlink_rate, uplink_rate])
    @pytest.mark.parametrize("gain", [1e-12, 1e-6, 1.0])
    def test_rate_grows_with_power(self, rate, gain):
        config = SystemConfig(bandwidth_hz=1e6, noise_w=1e-11)
        values = np.asarray(rate(self.powers, gain, config))
        assert np.all(np.diff(values) >= 0)

    @pytest.mark.parametrize("rate", [downlink_rate, uplink_rate])
    @pytest.mark.parametrize("power", [1e-3, 0.1, 3.0])
    def test_rate_grows_with_gain(self, rate, power):
        config = SystemConfig(bandwidth_hz=1e6, noise_w=1e-11)
        values = np.asarray(rate(power, self.gains, config))
        assert np.all(np.diff(values) >= 0)

    @pytest.mark.parametrize("bits", [1.0, 1e6, 1e9])
    def test_delay_shrinks_with_rate(self, bits):
        delays = np.asarray(comm_delay(bits, np.geomspace(1.0, 1e9, 25)))
        assert np.all(np.diff(delays) <= 0)

    @pytest.mark.parametrize("m", [1, 2])
    def test_twin_delay_shrinks_with_offset(self, two_layer_profiles, m):
        profile = two_layer_profiles[1]
        offsets = np.linspace(0.0, 1e10, 25)
        delays = [compute_delay(profile, m, 0, df) for df in offsets]
        assert all(b <= a for a, b in zip(delays, delays[1:]))
        assert delays[0] == compute_delay(profile, m, 1, 0.0)

    def test_total_delay_shrinks_with_power(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        totals = [
            evaluate(
                small_config,
                small_channel,
                two_layer_profiles,
                small_state.replace(p_ap=np.full(2, p)),
            ).t_total
            for p in np.linspace(0.05, 0.75, 15)
        ]
        for prev, cur in zip(totals, totals[1:]):
            assert np.all(cur <= prev)

    def test_total_delay_shrinks_with_offset(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        totals = [
            evaluate(
                small_config,
                small_channel,
                two_layer_profiles,
                small_state.replace(delta_f=np.array([0.0, df])),
            ).t_total[1]
            for df in np.linspace(0.0, 1e9, 15)
        ]
        assert all(b <= a for a, b in zip(totals, totals[1:]))


class TestComputeDelay:
    def test_branches(self, two_layer_profiles):
        profile = two_layer_profiles[0]
        assert compute_delay(profile, 1, 1, 0.0) == pytest.approx(1.0)
        assert compute_delay(profile, 1, 0, profile.f_loc) == pytest.approx(0.5)
        assert compute_delay(profile, 2, 0, 0.0) == compute_delay(profile, 2, 1, 0.0)

    def test_vectorized(self, two_layer_profiles):
        t = compute_delays(two_layer_profiles, [1, 2], [1, 0], [0.0, 0.5e9])
        np.testing.assert_allclose(t, [1.0, 2.0])


class TestEvaluate:
    def test_hand_computed(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        profiles = two_layer_profiles
        delays = evaluate(small_config, small_channel, profiles, small_state)
        # both gains are |1 + 1|^2 = 4
        rate_dl = 1e6 * math.log2(1 + 0.75 * 4)
        rate_ul = 1e6 * math.log2(1 + 0.1 * 4)
        np.testing.assert_allclose(delays.t_dl, [1e6 / rate_dl] * 2)
        np.testing.assert_allclose(delays.t_ul, [4e6 / rate_ul, 1e6 / rate_ul])
        np.testing.assert_allclose(delays.t_comp, [1.0, 2.0])
        breakdown = total_delay(small_config, small_channel, profiles, small_state, 1)
        assert breakdown.t_total == pytest.approx(1e6 / rate_dl + 1e6 / rate_ul + 2.0)
        single = total_delay(small_config, small_channel, profiles[1], small_state, 1)
        assert single.t_total == pytest.approx(breakdown.t_total)

    def test_zero_power_is_infinite(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(p_ap=np.array([0.0, 0.75]))
        delays = evaluate(small_config, small_channel, two_layer_profiles, state)
        assert delays.t_total[0] == math.inf
        assert math.isfinite(delays.t_total[1])

    def test_local_placement_ignores_links(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(placement=Placement.LOCAL, p_ap=np.zeros(2))
        delays = evaluate(small_config, small_channel, two_layer_profiles, state)
        np.testing.assert_allclose(delays.t_comp, [3.0, 2.5])
        assert np.all(delays.t_dl == 0) and np.all(delays.t_ul == 0)

    def test_offload_placement_sends_raw_input(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(placement=Placement.OFFLOAD)
        delays = evaluate(small_config, small_channel, two_layer_profiles, state)
        rate_ul = 1e6 * math.log2(1 + 0.1 * 4)
        np.testing.assert_allclose(delays.t_ul, [8e6 / rate_ul] * 2)
        np.testing.assert_allclose(delays.t_comp, [3e9 / 5e10, 5e9 / 5e10])


class TestObjective:
    def test_pure_delay_when_lambda_zero(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        delays = evaluate(small_config, small_channel, two_layer_profiles, small_state)
        j = objective(small_config, small_channel, two_layer_profiles, small_state)
        assert j == pytest.approx(float(np.sum(delays.t_total)))

    def test_loss_term_added(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        base = objective(small_config, small_channel, two_layer_profiles, small_state)
        weighted = small_config.replace(lambda_weight=2.0)
        j = objective(weighted, small_channel, two_layer_profiles, small_state)
        table = weighted.loss_profile.table(2)
        assert j - base == pytest.approx(2.0 * (table[0] + table[1]) / 2)

    def test_mean_loss(self):
        assert mean_loss([1, 2], [0.4, 0.2]) == pytest.approx(0.3)
        assert mean_loss([1, 2, 2], [0.0, 0.0]) == 0.0
        with pytest.raises(DomainError):
            mean_loss([3], [0.4, 0.2])


class TestAudit:
    def test_feasible(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        report = audit_constraints(
            small_config, small_channel, two_layer_profiles, small_state
        )
        assert report == []

    def test_power_budget(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        p_total = small_config.p_total_w
        state = small_state.replace(p_ap=np.array([0.55, 0.55]) * p_total)
        report = audit_constraints(
            small_config, small_channel, two_layer_profiles, state
        )
        assert len(report) == 1
        assert report[0].constraint == 21
        assert report[0].k is None
        assert report[0].residual == pytest.approx(0.1 * p_total)

    def test_frequency_box(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(
            delta_f=np.array([0.0, small_config.delta_f_max_hz + 1e6])
        )
        report = audit_constraints(
            small_config, small_channel, two_layer_profiles, state
        )
        assert {v.constraint for v in report} >= {23, 31}

    def test_offset_for_local_ud(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(delta_f=np.array([1e8, 0.5e9]))
        report = audit_constraints(
            small_config, small_channel, two_layer_profiles, state
        )
        assert [(v.constraint, v.k) for v in report] == [(36, 0)]

    def test_slow_twin_over_threshold(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(delta_f=np.array([0.0, 0.25e9]))
        report = audit_constraints(
            small_config, small_channel, two_layer_profiles, state
        )
        assert [(v.constraint, v.k) for v in report] == [(26, 1)]
        assert report[0].residual == pytest.approx(5e9 / 2.25e9 - 2.0)

    def test_twin_within_threshold(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(delta_f=np.array([0.0, 1e9]))
        report = audit_constraints(
            small_config, small_channel, two_layer_profiles, state
        )
        assert report == []

    def test_unit_modulus_and_cut_range(
        self, small_config, small_channel, small_state, two_layer_profiles
    ):
        state = small_state.replace(v=np.array([1.0, 0.5]), m=np.array([0, 2]))
        report = audit_constraints(
            small_config, small_channel, two_layer_profiles, state
        )
        constraints = {v.constraint for v in report}
        assert 27 in constraints
        assert 19 in constraints


class TestProfiles:
    def test_generated_loads_increase(self, toy_config):
        profiles = generate_profiles(toy_config, 0)
        assert profiles.loads.shape == (4, 4)
        assert np.all(np.diff(profiles.loads, axis=1) > 0)
        assert np.all(profiles.f_loc >= 5e9) and np.all(profiles.f_loc <= 12e9)

    def test_prefix_stable(self, toy_config):
        small = generate_profiles(toy_config.replace(k_users=2), 3)
        large = generate_profiles(toy_config.replace(k_users=5), 3)
        np.testing.assert_array_equal(large.f_loc[:2], small.f_loc)
        np.testing.assert_array_equal(large.loads[:2], small.loads)

    def test_stack_rejects_mismatch(self):
        a = UDProfile(1e9, np.array([1e9, 2e9]), np.array([1e6, 1e5]), 1e6, 0.1, 1e7)
        b = UDProfile(1e9, np.array([1e9]), np.array([1e6]), 1e6, 0.1, 1e7)
        with pytest.raises(ShapeError):
            stack_profiles([a, b])
