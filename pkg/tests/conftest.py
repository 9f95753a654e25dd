"""Session fixtures: cached steady states for the recurring parameter sets."""

from __future__ import annotations

import numpy as np
import pytest

from common import SHALLOW, shallow, steady_coupled, steady_single
from twinlc import CoupledParams


ACCEPT_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance(request):
    """Collector for the acceptance gate: one printed PASS/FAIL line each."""
    lines = request.config.stash.setdefault(ACCEPT_KEY, [])

    def record(num: int, label: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE {num:02d} {label}: {status}"
        if detail:
            line += f" [{detail}]"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPT_KEY, None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260814)


@pytest.fixture(scope="session")
def cached_steady():
    """Memoized single-oscillator steady states keyed by (params, cutoff, boundary)."""
    cache = {}

    def get(p, cutoff, boundary=None):
        key = (p, cutoff, boundary)
        if key not in cache:
            cache[key] = steady_single(p, cutoff, boundary)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def cached_steady_coupled():
    cache = {}

    def get(p, cutoff, boundary=None):
        key = (p, cutoff, boundary)
        if key not in cache:
            cache[key] = steady_coupled(p, cutoff, boundary)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def shallow_undriven(cached_steady):
    """Undriven two-ring steady state at N=30 with the default boundary."""
    return cached_steady(SHALLOW, 30, 2)


@pytest.fixture(scope="session")
def coupled_blockade(cached_steady_coupled):
    """Two identical two-ring oscillators, exchange coupling g=8, N=12 each."""
    p = CoupledParams(shallow(), coupling=8.0)
    return cached_steady_coupled(p, 12, 2)
