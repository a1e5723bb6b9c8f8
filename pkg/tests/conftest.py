"""Shared pytest config: prints one pass/fail line per acceptance
criterion at the end of a run that included the acceptance module."""

ACCEPTANCE_PREFIX = "test_acceptance.py::test_c"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"),
                          ("error", "FAIL"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if ACCEPTANCE_PREFIX in nodeid and getattr(report, "when", "call") == "call":
                name = nodeid.split("::")[-1]
                lines.append((name, label))
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, label in sorted(lines):
        terminalreporter.write_line(f"[{label}] {name}")
