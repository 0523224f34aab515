import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def record(request):
    """``record(number, ok, detail)`` stores one acceptance outcome."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def _record(number, ok, detail):
        results[number] = (bool(ok), detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
