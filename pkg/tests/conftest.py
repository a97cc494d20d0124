import functools

import numpy as np
import pytest

from v2v_blockage.config import RadioConfig, ScenarioConfig
from v2v_blockage.sim import simulate_point


@functools.lru_cache(maxsize=None)
def cached_sim(scenario: ScenarioConfig, radio: RadioConfig, d_tr, trials, seed, rule="random"):
    """Simulator runs are reused across test modules within one session."""
    rec = simulate_point(scenario, radio, d_tr, trials, seed, rule=rule)
    rec.setflags(write=False)
    return rec


def empirical_pmf(records) -> np.ndarray:
    return np.bincount(records["k"]) / len(records)


@pytest.fixture
def table_scenario():
    return ScenarioConfig()


@pytest.fixture
def radio():
    return RadioConfig()


ACCEPTANCE_LINES: list[str] = []


def report(number: int, passed: bool, detail: str) -> None:
    """Record the one-line verdict for an acceptance criterion, then enforce it."""
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
