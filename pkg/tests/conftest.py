"""
Shared fixtures for parqlab tests.
"""

import json

import numpy as np
import pytest

from parqlab.core import QuantGrid, par_from_grid
from parqlab.utils.settings import get_settings


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch, tmp_path):
    """Isolate every test from PARQLAB_* variables and a stray .env file."""
    for name in ("PARQLAB_WORKERS", "PARQLAB_LOG_LEVEL", "PARQLAB_OUTPUT_ROOT"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid3():
    """{-1, 0, 1}"""
    return QuantGrid.from_values([-1.0, 0.0, 1.0])


@pytest.fixture
def grid5():
    """{0, +-1, +-3}"""
    return QuantGrid.from_values([-3.0, -1.0, 0.0, 1.0, 3.0])


@pytest.fixture
def par5(grid5):
    return par_from_grid(grid5, 1.0)


@pytest.fixture
def quadratic_config():
    """Small noisy quadratic run with an optimum oracle."""
    return {
        "schema_version": 1,
        "name": "quad-aprox",
        "problem": {"kind": "quadratic", "c": [0.3, -0.7, 1.2], "noise_sigma": 0.1, "seed": 0},
        "optimizer": {"kind": "aprox", "grid": [-1.0, 0.0, 1.0], "lam": 0.5},
        "step_schedule": {"kind": "inverse-sqrt", "base": 0.5},
        "total_steps": 40,
        "seeds": [0, 1],
        "eval_every": 10,
    }


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to ``<tmp>/<name>.json`` and return the path."""

    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write
