import json
from pathlib import Path

import pytest

from mfpp import MfppConfig, MixedStableParams

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def oracles():
    return json.loads((DATA / "oracles.json").read_text())


@pytest.fixture
def default_params():
    return MixedStableParams(0.9, 0.5, 0.5, 0.5)


@pytest.fixture
def default_config(default_params):
    return MfppConfig(default_params, 1.0, 1.0)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
