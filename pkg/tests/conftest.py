import json
from contextlib import contextmanager
from pathlib import Path

import pytest

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())
_VERDICTS = "acceptance_verdicts"


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


def pytest_configure(config):
    setattr(config, _VERDICTS, {})


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL verdict for one acceptance criterion.

    Usage: ``with criterion(3, "title") as note: ...; note("detail")``.
    """
    verdicts = getattr(request.config, _VERDICTS)

    @contextmanager
    def record(number, title):
        details = []
        try:
            yield details.append
        except BaseException as exc:
            reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            verdicts[number] = ("FAIL", title, "; ".join(details + [reason]))
            raise
        verdicts[number] = ("PASS", title, "; ".join(details))

    return record


def pytest_terminal_summary(terminalreporter, config):
    verdicts = getattr(config, _VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        status, title, detail = verdicts[number]
        terminalreporter.write_line(f"criterion {number:>2} {status}: {title} [{detail}]")
