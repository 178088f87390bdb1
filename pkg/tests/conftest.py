import numpy as np
import pytest

from gsirkit.discrete import FiniteSpace, HilbertSubspace, JointModel, Partition

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion id")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    measured = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _RESULTS[number] = (title, "PASS" if rep.passed else "FAIL", measured)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status, measured = _RESULTS[number]
        line = f"criterion {number} [{status}] {title}"
        if measured:
            line += f" ({measured})"
        terminalreporter.write_line(line)


@pytest.fixture
def uniform4():
    return FiniteSpace.uniform(4)


@pytest.fixture
def halves():
    return Partition([[0, 1], [2, 3]])


@pytest.fixture
def joint_4x2():
    """Rows P(Y|X): (0.9, 0.1) twice then (0.2, 0.8) twice, uniform X."""
    rows = np.array([[0.9, 0.1], [0.9, 0.1], [0.2, 0.8], [0.2, 0.8]])
    return JointModel(0.25 * rows)


@pytest.fixture
def l2():
    return HilbertSubspace.full
