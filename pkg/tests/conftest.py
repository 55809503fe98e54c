import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Records a PASS/FAIL line for an acceptance criterion.

    The test calls the fixture with its label and detail string; the line is
    written as FAIL unless the test body completes.
    """
    entry = {}

    def record(label, detail=""):
        entry.update(label=label, detail=detail)

    yield record
    if entry:
        failed = getattr(request.node, "rep_call", None)
        status = "FAIL" if failed is None or failed.failed else "PASS"
        ACCEPTANCE_LINES.append(f"[{status}] {entry['label']}: {entry['detail']}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
