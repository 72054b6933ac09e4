import numpy as np
import pytest

from ksplap import _backend
from ksplap.coefficients import CoefficientSet
from ksplap.mesh import build_regular_mesh

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=_backend.available())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mesh16():
    return build_regular_mesh(-1, 1, -1, 1, 16, 16)


@pytest.fixture
def ex1_coeffs():
    return CoefficientSet(p=2.0, eps=0.01, alpha=40.0, beta=160.0, chi=0.2, d=0.05)


@pytest.fixture
def ex2_coeffs():
    return CoefficientSet(p=2.0, eps=0.5, alpha=5.0, beta=0.5, chi=1.0, d=0.25)
