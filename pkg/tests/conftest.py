import pytest

from corpus import K2_TEXT
from hlv.kripke import parse_kripke


@pytest.fixture
def k2():
    return parse_kripke(K2_TEXT)


def pytest_terminal_summary(terminalreporter):
    # acceptance lines are printed during the run; repeat them here so they
    # survive output capture
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod and mod.REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT_LINES:
            terminalreporter.write_line(line)
