"""Global pytest fixtures for the test suite.

Centralizes:
 - Project root path insertion (so individual tests don't repeat sys.path hacks)
 - Settings and logging isolation between tests
 - Reusable materials, meshes and scenario files
"""

import logging
import sys
from pathlib import Path

import pytest

# Ensure project root (containing src/) is on sys.path once
PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.core.config import reset_settings  # noqa: E402
from src.domain import presets  # noqa: E402
from src.fem.mesh import box_mesh  # noqa: E402


# -------------------- Isolation -------------------- #

@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch, tmp_path):
    """Every test starts from default settings with output under its tmp dir."""
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "results"))
    reset_settings()
    yield
    reset_settings()


@pytest.fixture(autouse=True)
def restore_root_logging():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


# -------------------- Materials -------------------- #

@pytest.fixture(scope="session")
def alloy():
    """Calibrated alloy with the dog-bone damage laws."""
    return presets.alloy()


@pytest.fixture(scope="session")
def alloy_plastic():
    return presets.alloy(damage=False)


@pytest.fixture(scope="session")
def perfect_plastic():
    return presets.kinematic_demo(b=None)


@pytest.fixture(scope="session")
def prager():
    return presets.kinematic_demo(b=0.0)


@pytest.fixture(scope="session")
def armstrong_frederick():
    return presets.kinematic_demo()


# -------------------- Meshes -------------------- #

@pytest.fixture
def cube():
    """Single unit cube element."""
    return box_mesh(1.0, 1.0, 1.0, 1, 1, 1)


@pytest.fixture
def bar():
    """Two unit cubes along x."""
    return box_mesh(2.0, 1.0, 1.0, 2, 1, 1)


# -------------------- Scenario files -------------------- #

ELASTIC_INI = """\
[scenario]
name = elastic
mode = matpoint

[material]
preset = aw7020-t6

[damage]
preset = dogbone

[protocol]
amplitude = 0.001
cycles = {cycles}
points_per_quarter = 20
"""

SMALL_PLATE_YAML = """\
scenario:
  name: small_plate
  mode: fem
material:
  preset: kinematic-demo-perfect
mesh:
  length: 8
  height: 4
  thickness: 1
  element_size: 2
  notch_depth: 2
protocol:
  amplitude: 0.0001
  cycles: 2
  points_per_quarter: 4
output:
  snapshot_every: 1
"""


@pytest.fixture
def elastic_ini(tmp_path):
    def make(cycles: int = 1) -> Path:
        path = tmp_path / f"elastic_{cycles}.ini"
        path.write_text(ELASTIC_INI.format(cycles=cycles), encoding="utf-8")
        return path

    return make


@pytest.fixture
def small_plate_yaml(tmp_path):
    path = tmp_path / "small_plate.yaml"
    path.write_text(SMALL_PLATE_YAML, encoding="utf-8")
    return path
