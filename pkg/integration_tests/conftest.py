"""Shared fixtures for DT-IRS-Bench integration tests."""

from pathlib import Path

import pytest

from dtirs_bench.src.config import dump_config, load_config

configs_dir = Path(__file__).parent.parent / "configs"


@pytest.fixture
def toy_config_path():
    """The small scenario shipped with the repository."""
    return configs_dir / "toy.toml"


@pytest.fixture
def scaled_config_path():
    return configs_dir / "scaled.toml"


@pytest.fixture
def write_config(tmp_path):
    """Write the toy scenario with top-level overrides and return its path."""

    def _write(name: str = "scenario.toml", **changes) -> Path:
        path = tmp_path / name
        dump_config(load_config(configs_dir / "toy.toml").replace(**changes), path)
        return path

    return _write
