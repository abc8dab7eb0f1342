import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from raycluster import kernels  # noqa: E402


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test once per kernel backend, restoring the previous one afterwards."""
    if request.param == "numba" and not kernels.HAS_NUMBA:
        pytest.skip("numba not installed")
    before = kernels.get_backend()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(before)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
