import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from geoplace import _backend  # noqa: E402


@pytest.fixture(params=sorted(_backend.AVAILABLE))
def backend(request):
    """Run a test once per available numerical core."""
    previous = _backend.set_backend(request.param)
    yield request.param
    _backend.set_backend(previous)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
