import time
import warnings

import pytest

from blockforge.classifier import CapWarning, enumerate_endok
from blockforge.repmod import Algebra


@pytest.fixture(scope="session")
def sd4():
    return Algebra.family("SD2A1", 4, {"c": 0})


@pytest.fixture(scope="session")
def sd4c1():
    return Algebra.family("SD2A1", 4, {"c": 1})


@pytest.fixture(scope="session")
def sd5():
    return Algebra.family("SD2A1", 5, {"c": 0})


@pytest.fixture(scope="session")
def q3b():
    return Algebra.family("Q3B", 4)


@pytest.fixture(scope="session")
def k4():
    return Algebra.family("KleinFourLocal", 2)


def _report(alg, cap=4):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CapWarning)
        return enumerate_endok(alg, cap)


@pytest.fixture(scope="session")
def sd4_report(sd4):
    return _report(sd4)


@pytest.fixture(scope="session")
def q3b_report(q3b):
    return _report(q3b)


@pytest.fixture(scope="session")
def k4_report(k4):
    return _report(k4)


_SUITE_LIMIT = 15 * 60


def pytest_sessionstart(session):
    session.config._blockforge_t0 = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    secs = time.perf_counter() - session.config._blockforge_t0
    ok = secs < _SUITE_LIMIT
    tr = session.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None:
        tr.write_line(f"suite runtime (criterion 10 budget): {'PASS' if ok else 'FAIL'} - {secs:.0f}s of {_SUITE_LIMIT}s")
    if not ok:
        session.exitstatus = 1
