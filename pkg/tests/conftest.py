from __future__ import annotations

import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from app.scenario.config import initialize_system

REPO_ROOT = Path(__file__).resolve().parents[1]
SCENARIOS_DIR = REPO_ROOT / "scenarios"

# same examples on every run; no example database between runs
settings.register_profile(
    "dai-sim",
    derandomize=True,
    database=None,
    deadline=None,
    print_blob=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dai-sim"))


@pytest.fixture
def world():
    """Default-configured live world: ETH 150, MKR 10, 1000 MKR held by `holders`."""
    return initialize_system()


@pytest.fixture
def scenario_text():
    def _read(name: str) -> str:
        return (SCENARIOS_DIR / name).read_text(encoding="utf-8")
    return _read
