_VERDICTS: dict[int, str] = {}


def record_verdict(criterion: int, ok: bool, detail: str = "") -> None:
    line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  {detail}"
    _VERDICTS[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[k])
