"""Unit tests for dtirs_bench.src.config."""

from pathlib import Path

import numpy as np
import pytest

from dtirs_bench.src.config import (
    LossProfile,
    PayloadParams,
    SystemConfig,
    config_from_dict,
    config_to_dict,
    dump_config,
    load_config,
)
from dtirs_bench.src.utils import ConfigError

configs_dir = Path(__file__).parent.parent / "configs"


class TestDefaults:
    def test_scenario_defaults(self):
        config = load_config(None)
        assert config == SystemConfig()
        assert config.k_users == 100
        assert config.m_layers == 12
        assert config.n_irs == 32
        assert config.p_total_w == 3.0
        assert config.t_max_s == 2.0
        assert config.r_min_bps == 5e3
        assert config.noise_w == 1e-11

    def test_default_file_matches_builtin(self):
        assert load_config(configs_dir / "default.toml") == SystemConfig()

    def test_shipped_files_load(self):
        scaled = load_config(configs_dir / "scaled.toml")
        assert (scaled.k_users, scaled.n_ap, scaled.n_irs) == (30, 16, 16)
        toy = load_config(configs_dir / "toy.toml")
        assert (toy.k_users, toy.m_layers) == (4, 4)


class TestParsing:
    def test_dotted_keys(self, tmp_path):
        path = tmp_path / "scenario.toml"
        path.write_text(
            "k_users = 7\npath_loss.alpha_irs_ud = 3.0\nflags.direct_link = true\n"
        )
        config = load_config(path)
        assert config.k_users == 7
        assert config.path_loss.alpha_irs_ud == 3.0
        assert config.flags.direct_link is True
        assert config.path_loss.alpha_ap_irs == 2.2

    def test_int_accepted_for_float(self):
        assert config_from_dict({"p_total_w": 2}).p_total_w == 2.0

    def test_syntax_error(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("k_users = \n")
        with pytest.raises(ConfigError) as info:
            load_config(path)
        assert "line" in str(info.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="no such file"):
            load_config(tmp_path / "absent.toml")

    def test_collects_every_error(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict({"k_users": "many", "n_irs": 4.5, "foo": 1})
        joined = " ".join(info.value.errors)
        assert "k_users" in joined
        assert "n_irs" in joined
        assert "foo: unknown key" in joined

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError) as info:
            config_from_dict({"solver": {"tolerance": 1.0}})
        assert info.value.errors == ["solver.tolerance: unknown key"]


class TestValidation:
    @pytest.mark.parametrize(
        "data",
        [
            {"k_users": 0},
            {"n_irs": -1},
            {"noise_w": 0.0},
            {"ga": {"mutation_rate": 1.5}},
            {"ga": {"population": 1}},
            {"geometry": {"irs_position": [0.0, 0.0]}},
            {"loss_profile": {"values": [0.1, 0.2]}},
            {"profiles": {"f_loc_min_hz": 2e10}},
        ],
    )
    def test_rejects(self, data):
        with pytest.raises(ConfigError):
            config_from_dict(data)

    def test_zero_lambda_allowed(self):
        assert config_from_dict({"lambda_weight": 0.0}).lambda_weight == 0.0

    def test_explicit_positions_must_cover_every_ud(self):
        with pytest.raises(ConfigError):
            config_from_dict(
                {"k_users": 3, "geometry": {"ud_positions": [[1.0, 1.0], [2.0, 2.0]]}}
            )


class TestDump:
    def test_round_trip(self, tmp_path):
        config = config_from_dict(
            {
                "k_users": 5,
                "m_layers": 3,
                "loss_profile": {"values": [0.3, 0.2, 0.1]},
                "geometry": {"ud_positions": [[1.0, 2.0]] * 5},
            }
        )
        path = tmp_path / "out.toml"
        dump_config(config, path)
        assert load_config(path) == config

    def test_dict_view(self):
        data = config_to_dict(SystemConfig())
        assert data["solver"]["n_rand"] == 100
        assert data["geometry"]["ud_positions"] == []


class TestTables:
    def test_payload_decays_with_cut(self):
        bits = PayloadParams().uplink_bits(4)
        assert bits.shape == (5,)
        assert bits[0] == 32e6
        assert np.all(np.diff(bits) < 0)

    def test_loss_table(self):
        table = LossProfile().table(3)
        np.testing.assert_allclose(table, 0.5 * np.exp(-0.3 * np.arange(1, 4)))
        assert LossProfile(values=(0.4, 0.1)).table(2).tolist() == [0.4, 0.1]
