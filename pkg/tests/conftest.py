import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tablemoves import _kernels  # noqa: E402

# Example instance with ten points; margins as printed (4 decimals)
EX_MU = [0.0732, 0.0976, 0.1220, 0.1463, 0.1707, 0.0244, 0.0488, 0.0732, 0.0976, 0.1463]
EX_NU = [0.2059, 0.0000, 0.0294, 0.0882, 0.1471, 0.1176, 0.0588, 0.1765, 0.0882, 0.0882]
EX_TABLE = np.array([
    [0.0732, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0.0976, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0.0352, 0, 0.0294, 0, 0, 0.0115, 0.0100, 0.0359, 0, 0],
    [0, 0, 0, 0.0882, 0, 0.0581, 0, 0, 0, 0],
    [0, 0, 0, 0, 0.1471, 0.0237, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0.0244, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0.0488, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0.0732, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0.0093, 0.0882, 0],
    [0, 0, 0, 0, 0, 0, 0, 0.0581, 0, 0.0882],
])
EX_VALUE = 0.4648


@pytest.fixture(params=sorted(_kernels.backends()))
def kernels(request):
    return _kernels.backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_margins(rng, n, zeros=0.0):
    mu = rng.random(n)
    nu = rng.random(n)
    if zeros:
        mu[rng.random(n) < zeros] = 0.0
        nu[rng.random(n) < zeros] = 0.0
        mu[0] += 1e-3
        nu[-1] += 1e-3
    return mu / mu.sum(), nu / nu.sum()


# ---------------------------------------------------------------------------
# acceptance criteria bookkeeping: tests marked ``criterion(k)`` feed one
# PASS/FAIL line per criterion into the terminal summary.

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.setdefault(crit, []).append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        rep.criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok = all(_CRITERIA[k])
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({sum(_CRITERIA[k])}/{len(_CRITERIA[k])} checks)")
