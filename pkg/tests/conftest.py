import numpy as np
import pytest

from recursive_dht.simulator import bootstrap


def brute_successor(ids, x):
    """Linear-scan owner: the id with the smallest clockwise distance from x."""
    return min(ids, key=lambda v: (v - x) % 1.0)


def brute_predecessor(ids, x):
    return min(ids, key=lambda v: (x - v) % 1.0 or 1.0)


@pytest.fixture
def small_network():
    def make(n, k=3, seed=0, true_size=False):
        rng = np.random.default_rng(seed)
        ids = sorted(set(rng.random(n).tolist()))
        return bootstrap(ids, k, rng, true_size=true_size)

    return make


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary, then assert."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        line = f"{'PASS' if passed else 'FAIL'} {name}: {detail}"
        print(line)
        _ACCEPTANCE.append((name, passed, detail))
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
