import importlib

import numpy as np
import pytest

from riskattr import _kernels_py


def _compiled():
    try:
        return importlib.import_module("riskattr._kernels")
    except ImportError:
        return None


KERNEL_BACKENDS = [pytest.param(_kernels_py, id="python")]
if _compiled() is not None:
    KERNEL_BACKENDS.append(pytest.param(_compiled(), id="cython"))


@pytest.fixture(params=KERNEL_BACKENDS)
def kernels(request):
    """Each available kernel implementation in turn."""
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
