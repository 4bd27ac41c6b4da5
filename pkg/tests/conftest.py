from __future__ import annotations

from pathlib import Path

import pytest

from capcluster.config import ClusterConfig, load_config

REPO_ROOT = Path(__file__).resolve().parents[1]
CONFIG_PATH = REPO_ROOT / "configs" / "cluster16.json"


@pytest.fixture(scope="session")
def cluster16() -> ClusterConfig:
    return load_config(CONFIG_PATH)


@pytest.fixture()
def config_path() -> Path:
    return CONFIG_PATH
