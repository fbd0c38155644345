import pytest

_VERDICTS = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    A test that errors before recording its verdict is listed as FAIL.
    """
    seen = []

    def record(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        seen.append(line)
        _VERDICTS.append(line)
        print(line)
        return ok

    yield record
    if not seen:
        line = f"FAIL {request.node.name}: raised before a verdict was recorded"
        _VERDICTS.append(line)
        print(line)


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
