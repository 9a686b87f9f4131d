import pytest

_RESULTS = []


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run tests marked slow (hours on one core)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def record():
    """Store one PASS/FAIL line per acceptance criterion."""
    def _record(label, passed, detail=""):
        _RESULTS.append(f"{label}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip())
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)
