"""Suite-level hooks: print the acceptance panel after the test run."""


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for index, name, ok, detail in sorted(acceptance_log.RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion-{index:02d}  {name:<24s} {status}  {detail}")
