"""Per-criterion PASS/FAIL summary for the acceptance suite."""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_titles: dict[int, str] = {}
_outcomes: dict[int, list[bool]] = {}


def _number(nodeid):
    m = _CRITERION.search(nodeid)
    return int(m.group(1)) if m else None


def pytest_collection_modifyitems(items):
    for item in items:
        k = _number(item.nodeid)
        if k is not None and k not in _titles:
            doc = (item.function.__doc__ or "").strip().splitlines()
            _titles[k] = doc[0] if doc else item.name


def pytest_runtest_logreport(report):
    k = _number(report.nodeid)
    if k is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(k, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_titles):
        results = _outcomes.get(k)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {k}: {status}  {_titles[k]}")
