import math

import pytest
from hypothesis import settings

from qbattery import BatteryParams, DriveKind

settings.register_profile("qbattery", deadline=None, max_examples=40)
settings.load_profile("qbattery")

ACCEPTANCE_LINES = []


def quad(**kw) -> BatteryParams:
    return BatteryParams(drive_kind=DriveKind.QUADRATIC, **kw)


def lin(**kw) -> BatteryParams:
    return BatteryParams(drive_kind=DriveKind.LINEAR, **kw)


def rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


@pytest.fixture
def theta_values():
    return (0.0, math.pi / 3, math.pi, 3 * math.pi / 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
