import numpy as np
import pytest
from hypothesis import settings

from todacurves import arclength, integrate
from todacurves.curve_io import load_fixture

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def random8():
    return load_fixture("random8")[0]


@pytest.fixture(scope="session")
def toda6():
    return load_fixture("toda6")[0]


@pytest.fixture(scope="session")
def octagon_lift():
    return load_fixture("octagon_lift")[0]


@pytest.fixture(scope="session")
def tangential_traj(random8):
    return integrate(random8, arclength.tangential_coeffs, 1e-3, 1000)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config._acceptance_lines

    def record(number, title, checks):
        ok = all(value < bound for _, value, bound in checks)
        detail = "; ".join(f"{name} {value:.3e} < {bound:.0e}" for name, value, bound in checks)
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
