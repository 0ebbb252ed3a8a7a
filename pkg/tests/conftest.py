"""Shared fixtures: source path, small fast scenarios and cached preset runs."""

import os
import sys
from dataclasses import replace

import pytest

SRC = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from ghostphase import utils  # noqa: E402
from ghostphase.config import EnvelopeConfig, GridConfig, ObjectSpec, ScenarioConfig, load_preset  # noqa: E402
from ghostphase.core import run_scenario  # noqa: E402

PRESETS = ("flat", "phase-slit", "double-phase-slit")


@pytest.fixture(autouse=True)
def quiet_progress():
    utils.QUIET = True
    yield
    utils.QUIET = False


@pytest.fixture
def small_config():
    """Default geometry on a 257-sample object grid (seconds, not minutes)."""
    return ScenarioConfig(name="small", grid=GridConfig(n=257, object_pitch=20e-6))


@pytest.fixture
def small_slit_config(small_config):
    return replace(small_config, name="small-slit", object=ObjectSpec("phase-slit"))


@pytest.fixture
def small_envelope():
    return EnvelopeConfig(mode="full-model", waist=0.15e-3, n=257, pitch=4e-6)


@pytest.fixture(scope="session")
def preset_runs():
    """Full-size preset runs with their coincidence maps, computed once."""
    utils.QUIET = True
    runs = {name: run_scenario(load_preset(name), keep_map=True) for name in PRESETS}
    utils.QUIET = False
    return runs
