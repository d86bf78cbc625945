"""Suite wiring: collect acceptance outcomes and print one line per criterion.

The acceptance tests are ordinary pytest tests; this hook only adds a compact
PASS/FAIL digest at the end of the run so the release gate can be read at a
glance without scrolling through the full report.
"""

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        if report.passed:
            _ACCEPTANCE[name] = "PASS"
        elif report.skipped:
            _ACCEPTANCE[name] = "SKIP"
        else:
            _ACCEPTANCE[name] = "FAIL"
    elif report.when == "setup" and not report.passed:
        _ACCEPTANCE[name] = "SKIP" if report.skipped else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        label = name.removeprefix("test_").replace("_", " ")
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {label}")
