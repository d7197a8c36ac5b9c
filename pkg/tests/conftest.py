import numpy as np
import pytest

from agghoo.core import Dataset

_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        terminalreporter.write_line(f"{outcome}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, n, d=2, M=2, grid=None) -> Dataset:
    """Random data; ``grid`` draws integer features from ``range(grid)`` to force ties."""
    if grid is None:
        X = rng.random((n, d))
    else:
        X = rng.integers(0, grid, size=(n, d)).astype(float)
    return Dataset(X, rng.integers(0, M, size=n), M)
