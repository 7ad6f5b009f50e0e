"""Shared fixtures for tests."""

import json

import numpy as np
import pytest


@pytest.fixture
def rng():
    """Seeded generator so every test is reproducible."""
    return np.random.default_rng(20240917)


@pytest.fixture
def sim_config():
    """SimulatorConfig loaded from real config file."""
    from settings import SimulatorConfig
    return SimulatorConfig()


@pytest.fixture
def qubit_states():
    """|0><0|, |1><1|, |+x><+x| as density matrices."""
    zero = np.array([[1, 0], [0, 0]], dtype=complex)
    one = np.array([[0, 0], [0, 1]], dtype=complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    return {"0": zero, "1": one, "+": plus}


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON-able object under tmp_path and return the path."""
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return path
    return _write


@pytest.fixture
def run_cli(capsys):
    """Run main(argv); return (exit code, stdout)."""
    from main import main

    def _run(*argv):
        code = main([str(a) for a in argv])
        return code, capsys.readouterr().out
    return _run
