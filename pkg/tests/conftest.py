import pytest

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line and fail the test when ``ok`` is false."""
    lines = request.config.stash[_LINES_KEY]

    def record(number, ok, detail, blocking=True):
        tag = ("PASS" if ok else "FAIL") if blocking else ("stretch-pass" if ok else "stretch-miss")
        line = f"{tag} criterion {number}: {detail}"
        print(line)
        lines.append(line)
        if blocking:
            assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
