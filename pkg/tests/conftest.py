import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fochlab.model import ResolutionWarning
from fochlab.spectral import Grid1D, RealField

settings.register_profile("default", max_examples=30, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (passed, detail), filled by the acceptance tests
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(passed), detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(autouse=True)
def _quiet_resolution():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        yield


@pytest.fixture
def grid():
    return Grid1D(2 * np.pi, 128)


def band_limited(grid: Grid1D, coeffs: np.ndarray) -> RealField:
    c = np.zeros(grid.n // 2 + 1, dtype=complex)
    c[: len(coeffs)] = coeffs
    c[0] = c[0].real
    return RealField.from_rfft(grid, c)


@st.composite
def fields(draw, grid=Grid1D(2 * np.pi, 128), max_mode=10, scale=1.0):
    """Random band-limited fields with modes 0..max_mode."""
    m = draw(st.integers(1, max_mode))
    amp = st.floats(-scale, scale, allow_nan=False, allow_infinity=False)
    re = np.array(draw(st.lists(amp, min_size=m + 1, max_size=m + 1)))
    im = np.array(draw(st.lists(amp, min_size=m + 1, max_size=m + 1)))
    return band_limited(grid, re + 1j * im)
