"""Shared fixtures: repository paths and scenario-file helpers."""

import os

import pytest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIO_DIR = os.path.join(REPO_ROOT, "scenarios")


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR


@pytest.fixture
def model_a_ini():
    return os.path.join(SCENARIO_DIR, "model_a.ini")


@pytest.fixture
def model_b_ini():
    return os.path.join(SCENARIO_DIR, "model_b.ini")


@pytest.fixture
def adiabatic_ini():
    return os.path.join(SCENARIO_DIR, "adiabatic.ini")


@pytest.fixture
def write_ini(tmp_path):
    """Write scenario text to a temp file and return its path."""

    def _write(text, name="scenario.ini"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write
