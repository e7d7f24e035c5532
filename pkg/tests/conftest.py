import numpy as np
import pytest

from pathcalc.corpus import square_annulus
from pathcalc.geometry import Disk, Rect, discretize


@pytest.fixture(scope="session")
def unit_square_X():
    return discretize(Rect(0, 1 + 1j), 0.05)


@pytest.fixture(scope="session")
def disk_X():
    return discretize(Disk(0, 1), 0.05)


@pytest.fixture(scope="session")
def annulus_X():
    return discretize(square_annulus(), 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when == "call" or report.outcome != "passed":
        crit = dict(report.user_properties).get("criterion")
        if crit is not None:
            _CRITERIA.setdefault(crit, []).append((report.nodeid.split("::")[-1], report.passed))


def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m is not None:
        item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA):
        parts = _CRITERIA[crit]
        ok = all(p for _, p in parts)
        failed = [n for n, p in parts if not p]
        tail = f"  (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {crit:>2}: {'PASS' if ok else 'FAIL'}{tail}")
