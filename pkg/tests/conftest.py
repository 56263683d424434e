import numpy as np
import pytest

from hamflow.expr import ChartSpec


@pytest.fixture
def m1():
    return ChartSpec.momentum(1)


@pytest.fixture
def m2():
    return ChartSpec.momentum(2)


@pytest.fixture
def v1():
    return ChartSpec.velocity(1)


@pytest.fixture
def rng():
    return np.random.default_rng(1729)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per criterion for the terminal summary."""
    def record(label: str, measured: float, tolerance: str, elapsed: float, limit: float, ok: bool):
        status = "PASS" if ok and elapsed < limit else "FAIL"
        line = f"{status} {label}: measured={measured:.3e} ({tolerance}) time={elapsed:.2f}s (< {limit:g}s)"
        print(line)
        _ACCEPTANCE_LINES.append(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
