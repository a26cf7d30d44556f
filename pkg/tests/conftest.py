import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from boojum import AnchoringParams, GridConfig, ModelParams, build_grid, default_profile  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def small_grid():
    return build_grid(GridConfig(n_radial=12, n_polar=24, outer_radius=4.0, grading=1.1))


@pytest.fixture(scope="session")
def small_profile(small_grid):
    return default_profile(AnchoringParams(), small_grid)


@pytest.fixture(scope="session")
def params():
    return ModelParams(nu=1.0, mu=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit_field(rng, n):
    u = rng.standard_normal((n, 3))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


@pytest.fixture
def acceptance_log():
    """Record one verdict line per acceptance criterion for the terminal summary."""

    def record(tag: str, passed: bool, detail: str):
        line = f"{tag:<4} {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
