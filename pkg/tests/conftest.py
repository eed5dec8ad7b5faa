ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail):
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append((number, f"criterion {number:02d} [{status}] {title}: {detail}"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
