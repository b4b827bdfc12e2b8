"""
Shared fixtures: short forced and unforced runs on small grids.
"""

import sys
from pathlib import Path

import pytest

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from cascade_scope.solver import SimulationConfig, run  # noqa: E402


def small_config(N: int = 16, target: float = 2000.0, **overrides) -> SimulationConfig:
    """Fixed-step configuration with no spin-up and theorem checks off."""
    data = {
        "grid": {"N": N},
        "flow": {"nu": 0.1},
        "time": {"dt": 0.01, "T": 0.5, "spin_up": 0.0, "snapshot_every": 0.01, "log_every": 0},
        "forcing": {"k_f": 2, "mode": "gr", "target": target, "seed": 0},
        "initial": {"kind": "random", "amplitude": 0.5, "k_max": 3.0, "seed": 1},
        "checks": {"theorem_checks": False},
    }
    for section, values in overrides.items():
        data.setdefault(section, {}).update(values)
    return SimulationConfig.from_dict(data)


@pytest.fixture(scope="session")
def forced_run():
    """Forced 16³ trajectory over T = 0.5 with 51 snapshots."""
    return run(small_config())


@pytest.fixture(scope="session")
def forced_run_32():
    """Forced 32³ trajectory; resolves scales between 4dx and R0."""
    return run(small_config(N=32))


@pytest.fixture(scope="session")
def unforced_run():
    return run(small_config(target=0.0))
