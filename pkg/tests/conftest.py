import numpy as np
import pytest

from kreinkernels import _accel

# criterion number -> (passed, detail); printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["numpy", "numba"])
def accel_path(request, monkeypatch):
    """Run the test once per loop-kernel implementation."""
    if request.param == "numba":
        if not _accel.HAVE_NUMBA:
            pytest.skip("numba not installed")
        monkeypatch.setattr(_accel, "USE_NUMBA", True)
    else:
        monkeypatch.setattr(_accel, "USE_NUMBA", False)
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
