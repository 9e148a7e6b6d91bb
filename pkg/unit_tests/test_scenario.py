"""Unit tests for dtirs_bench.src.scenario."""

import numpy as np

from dtirs_bench.src.scenario import build_scenario


class TestBuildScenario:
    def test_deterministic(self, toy_config):
        a, b = build_scenario(toy_config, 7), build_scenario(toy_config, 7)
        np.testing.assert_array_equal(a.channels.h_irs_ud, b.channels.h_irs_ud)
        np.testing.assert_array_equal(a.profiles.loads, b.profiles.loads)
        assert a.solver_seed == b.solver_seed
        assert a.seed == 7

    def test_seeds_differ(self, toy_config):
        a, b = build_scenario(toy_config, 0), build_scenario(toy_config, 1)
        assert not np.array_equal(a.profiles.f_loc, b.profiles.f_loc)
        assert a.solver_seed != b.solver_seed

    def test_irs_size_only_changes_fading(self, toy_config):
        small = build_scenario(toy_config, 3)
        large = build_scenario(toy_config.replace(n_irs=8), 3)
        np.testing.assert_array_equal(
            small.geometry.ud_positions, large.geometry.ud_positions
        )
        np.testing.assert_array_equal(small.profiles.loads, large.profiles.loads)
        assert large.channels.n_irs == 8
        assert small.solver_seed == large.solver_seed

    def test_more_users_keep_the_first(self, toy_config):
        few = build_scenario(toy_config, 4)
        many = build_scenario(toy_config.replace(k_users=9), 4)
        k = toy_config.k_users
        np.testing.assert_array_equal(few.profiles.f_loc, many.profiles.f_loc[:k])
        np.testing.assert_array_equal(few.profiles.loads, many.profiles.loads[:k])
        np.testing.assert_array_equal(
            few.geometry.ud_positions, many.geometry.ud_positions[:k]
        )
