import os

import pytest

from orbitpressure import _kernels

# criterion number -> (passed, detail)
ACCEPTANCE = {}


def record(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_report_header(config):
    return f"orbitpressure kernel backend: {_kernels.BACKEND} (available: {', '.join(_kernels.available())})"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(params=_kernels.available())
def backend(request):
    """Run a test once per available kernel backend."""
    old = _kernels.use(request.param)
    yield request.param
    _kernels.use(old)


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


os.environ.setdefault("ORBIT_PRESSURE_THREADS", "1")
