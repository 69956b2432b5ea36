"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import OrderedDict

import pytest

_outcomes: "OrderedDict[int, dict]" = OrderedDict()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            number, title = mark.args
            entry = _outcomes.setdefault(number, {"title": title, "failed": [], "passed": 0})
            item.user_properties.append(("acceptance", number))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "acceptance" not in props:
        return
    entry = _outcomes[props["acceptance"]]
    if report.when == "call" and report.passed:
        entry["passed"] += 1
    elif report.failed or (report.when == "setup" and report.skipped):
        entry["failed"].append(report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        entry = _outcomes[number]
        ran = entry["passed"] + len(entry["failed"])
        if ran == 0:
            status = "NOT RUN"
        elif entry["failed"]:
            status = "FAIL"
        else:
            status = "PASS"
        line = f"{status:7} criterion {number}: {entry['title']}"
        if entry["failed"]:
            line += f" ({len(entry['failed'])}/{ran} failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
