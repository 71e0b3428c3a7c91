import pytest

from subproxy.graph_core import SummaryGraph


@pytest.fixture
def chain():
    # A -> M -> B with self loops
    return SummaryGraph(3, {(0, 1), (1, 2)}, names=("A", "M", "B"))


@pytest.fixture
def diamond():
    # U -> A, U -> B, A -> M, M -> B
    return SummaryGraph(4, {(0, 1), (0, 3), (1, 2), (2, 3)}, names=("U", "A", "M", "B"))


# -- acceptance reporting -------------------------------------------------------

_CRITERIA: list = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    details = ", ".join(f"{k}={v}" for k, v in item.user_properties)
    _CRITERIA.append((marker.args[0], item.name, report.outcome, details))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, outcome, details in sorted(_CRITERIA, key=lambda r: (r[0], r[1])):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {num}: {verdict}  {name}"
        if details:
            line += f"  [{details}]"
        terminalreporter.write_line(line)
