import numpy as np
import pytest

from chartkit import _kernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_channels(rng, n, m):
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


@pytest.fixture(params=sorted(_kernels.backends()))
def kernel_impl(request):
    return _kernels.backends()[request.param]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
