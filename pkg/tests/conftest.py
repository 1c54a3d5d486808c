import numpy as np
import pytest

from cee_rmab import gilbert_elliott, load_scenario
from cee_rmab.markov import RewardedMarkovChain


@pytest.fixture(scope="session")
def scenario_s():
    return load_scenario("S")


@pytest.fixture(scope="session")
def table_chains(scenario_s):
    return list(scenario_s.arms)


def toy_chains():
    """Two arms: a good/bad channel and a 3-state chain whose passive law differs."""
    a = gilbert_elliott(0.4, 0.3, (0.2, 0.9), "toy-a")
    P = np.array([[0.5, 0.3, 0.2], [0.1, 0.6, 0.3], [0.3, 0.3, 0.4]])
    Q = np.array([[0.8, 0.1, 0.1], [0.2, 0.7, 0.1], [0.25, 0.25, 0.5]])
    b = RewardedMarkovChain(P, np.array([0.1, 0.5, 0.8]), Q, "toy-b")
    return [a, b]


def five_chains():
    return [
        gilbert_elliott(0.3, 0.6, (0.15, 0.9), "f1"),
        gilbert_elliott(0.7, 0.4, (0.2, 0.85), "f2"),
        gilbert_elliott(0.2, 0.5, (0.1, 1.0), "f3"),
        gilbert_elliott(0.5, 0.5, (0.3, 0.6), "f4"),
        gilbert_elliott(0.45, 0.2, (0.05, 0.7), "f5"),
    ]


# acceptance criteria report: one line per criterion, printed after the run
ACCEPTANCE = []


def record_criterion(name, ok, detail):
    ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
