import pytest

_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request, capsys):
    """Record one acceptance criterion: ``verdict(k, title, checks)`` with checks {label: (ok, detail)}."""

    def record(k: int, title: str, checks: dict[str, tuple[bool, str]]) -> list[str]:
        ok = all(passed for passed, _ in checks.values())
        lines = [f"{'PASS' if ok else 'FAIL'}  criterion {k:>2}: {title}"]
        lines += [f"        [{'ok' if passed else 'x '}] {label}: {detail}" for label, (passed, detail) in checks.items()]
        request.config.stash.setdefault(_VERDICTS, []).append((k, lines))
        with capsys.disabled():
            print("\n" + "\n".join(lines))
        return [label for label, (passed, _) in checks.items() if not passed]

    return record


def pytest_terminal_summary(terminalreporter, config):
    verdicts = config.stash.get(_VERDICTS, [])
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for _, lines in sorted(verdicts):
        terminalreporter.write_line(lines[0])
