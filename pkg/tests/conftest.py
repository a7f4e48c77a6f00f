"""Shared pytest hooks: a one-line verdict per acceptance criterion."""

from __future__ import annotations

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by a test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "passed": True, "ran": False, "seconds": 0.0})
    if call.when == "call" or call.excinfo is not None:
        entry["ran"] = True
        entry["seconds"] += call.duration
        if call.excinfo is not None:
            entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        verdict = "PASS" if entry["passed"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d}: {verdict}  {entry['title']} ({entry['seconds']:.1f} s)")
