import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctxkit.core import EmpiricalModel, Scenario  # noqa: E402


def cycle_scenario(n):
    obs = [f"x{i}" for i in range(n)]
    return Scenario(obs, ("0", "1"), [(obs[j], obs[(j + 1) % n]) for j in range(n)])


def random_model(scenario, rng):
    return EmpiricalModel(
        scenario, [rng.dirichlet(np.ones(scenario.n_sections(i))) for i in range(scenario.n_contexts)]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20221020)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
