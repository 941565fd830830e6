import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "mzk", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("mzk")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_field(grid, rng, decay=0.0, scale=1.0):
    from mzk.spectral import SpectralField, bessel_weight
    c = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return SpectralField(grid, scale * c * bessel_weight(grid, -decay))


#: one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
