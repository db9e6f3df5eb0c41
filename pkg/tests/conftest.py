from collections import defaultdict

# criterion number -> list of (part, passed, detail), filled by test_acceptance
CRITERIA: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        parts = CRITERIA[k]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {'ok' if p else 'FAIL'} ({d})" for name, p, d in parts)
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
