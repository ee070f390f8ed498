from __future__ import annotations

import sys

import numpy as np
import pytest

from ucscreen import cases
from ucscreen._accel import HAVE_NUMBA
from ucscreen.grid import build_ptdf

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture(scope="session")
def five():
    grid = cases.five_node()
    return grid, build_ptdf(grid)


@pytest.fixture(scope="session")
def two():
    grid = cases.two_node()
    return grid, build_ptdf(grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
