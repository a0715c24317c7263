import math

import numpy as np
import pytest

from vqefactor.instance import encode, make_benchmark_instance
from vqefactor.simulator import StateVector

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def _report(number: int, ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _report


@pytest.fixture(scope="session")
def nine():
    return make_benchmark_instance(9)


def superposition(inst, weights: dict) -> StateVector:
    """Real state with probability ``w`` on encode(p, q) for each (p, q): w."""
    amps = np.zeros(1 << inst.N)
    for (p, q), w in weights.items():
        amps[int(encode(inst, p, q), 2)] = math.sqrt(w)
    return StateVector(amps, inst.N)


@pytest.fixture(scope="session")
def nine_toy():
    # two-qubit layout (one free bit each for p and q) used by the worked example
    return make_benchmark_instance(9, n_p=2, n_q=2)


@pytest.fixture
def psi1(nine_toy):
    # sqrt(0.9)|00> + sqrt(0.1)|11>
    return superposition(nine_toy, {(1, 1): 0.9, (3, 3): 0.1})


@pytest.fixture
def psi2(nine_toy):
    # sqrt(0.5)|01> + sqrt(0.5)|10>
    return superposition(nine_toy, {(1, 3): 0.5, (3, 1): 0.5})
