import numpy as np
import pytest

from fairalloc.population import Group, GroupedPopulation
from fairalloc.score_dist import ScoreDistribution


def two_group(d1, d2, w=(0.5, 0.5)):
    return GroupedPopulation([Group("S1", w[0], d1), Group("S2", w[1], d2)])


@pytest.fixture
def d_a():
    return ScoreDistribution([0.1, 0.3, 0.6], [0.5, 0.3, 0.2])


@pytest.fixture
def g2():
    return two_group(ScoreDistribution([0.2, 0.8], [0.8, 0.2]), ScoreDistribution([0.1, 0.4], [0.8, 0.2]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
