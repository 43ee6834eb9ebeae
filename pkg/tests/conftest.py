import numpy as np
import pytest

from gobm.model import GobmParams, LogSeries
from gobm.simulate import SimulationSpec, simulate_logpath

HAND = [0.1, -0.2, 0.3]


@pytest.fixture
def hand_series():
    return LogSeries(np.array(HAND), 1.0)


@pytest.fixture(scope="session")
def set1_path():
    """One five-year daily path from the asymmetric parameter set."""
    params = GobmParams.from_rates(0.8, 0.3, 0.0, 0.0, m=1.0)
    return simulate_logpath(SimulationSpec(params, x0=0.0, n=1260, seed=11))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
