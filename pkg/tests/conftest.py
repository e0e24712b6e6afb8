"""Prints one PASS/FAIL line per acceptance criterion at the end of a run."""

import pytest

_results: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    _, ok = _results.get(number, (title, True))
    _results[number] = (title, ok and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, ok = _results[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
