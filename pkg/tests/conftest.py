import pytest

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, ok, detail)`` for the end-of-run summary, then assert."""
    results = request.config.stash[_ACCEPTANCE]

    def record(label, ok, detail=""):
        results.append((label, bool(ok), detail))
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_ACCEPTANCE, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in results:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
