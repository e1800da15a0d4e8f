import json
import os

import pytest

DATA = os.path.join(os.path.dirname(__file__), "data", "frozen_oracles.json")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def frozen():
    with open(DATA) as fh:
        return json.load(fh)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":").lstrip("#"))):
            terminalreporter.write_line(line)
