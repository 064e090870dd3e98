import re


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_acceptance\.py::test_c(\d+)_(\w+)", getattr(rep, "nodeid", ""))
            if m and rep.when == "call":
                lines.append((int(m.group(1)), m.group(2), rep.passed))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, name, ok in sorted(lines):
            terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {name}")
