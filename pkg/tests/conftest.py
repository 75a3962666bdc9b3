from __future__ import annotations

import importlib.util
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
SAMPLE_DATASET = REPO_ROOT / "data" / "intel_lab_sample.txt"
DEFAULT_CONFIG = REPO_ROOT / "configs" / "default.json"
TUNED_CONFIG = REPO_ROOT / "configs" / "tuned.json"


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO_ROOT


@pytest.fixture(scope="session")
def sample_dataset() -> Path:
    return SAMPLE_DATASET


def load_script(name: str):
    """Import a file from scripts/ as a module."""
    path = REPO_ROOT / "scripts" / f"{name}.py"
    spec = importlib.util.spec_from_file_location(name, path)
    module = importlib.util.module_from_spec(spec)
    sys.modules[name] = module
    spec.loader.exec_module(module)
    return module


@pytest.fixture(scope="session")
def oracle_replay():
    return load_script("oracle_replay")
