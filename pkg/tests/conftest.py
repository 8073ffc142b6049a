import numpy as np
import pytest

from cqec.codes import three_qubit_phase_code


@pytest.fixture(scope="session")
def phase3():
    return three_qubit_phase_code()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_bloch(rng, pure=False):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return v if pure else v * rng.uniform(0, 1)


_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion; printed in the terminal summary."""

    def record(label: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        print(line)
        _CRITERIA.append((label, passed, line))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, _, line in sorted(_CRITERIA, key=lambda c: int(c[0].split()[1])):
            terminalreporter.write_line(line)
