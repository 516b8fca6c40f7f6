from __future__ import annotations

from datetime import date

import pytest

from gridlens import GenConfig, generate, load_manifest, load_scenario

from fixtures import build_http_store


@pytest.fixture(scope="session")
def small_scenario_dir(tmp_path_factory):
    """The seed-1, 5-agent, 2-day generated scenario (spec smoke example)."""
    out = tmp_path_factory.mktemp("gen_small")
    generate(GenConfig(seed=1, n_agents=5, start_date=date(2025, 1, 1), end_date=date(2025, 1, 3)), out)
    return out


@pytest.fixture(scope="session")
def small_store(small_scenario_dir):
    return load_scenario(load_manifest(small_scenario_dir / "scenario.toml"))


@pytest.fixture(scope="session")
def http_store():
    return build_http_store()
