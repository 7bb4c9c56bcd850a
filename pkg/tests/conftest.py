import math

import pytest

from ratasim.config import preset
from ratasim.domain import Category, SatelliteState, Task


def make_sat(sat_id=0, *, eclipse=0.0, phase=0.0, period=6000.0, battery=280.0, **kw):
    """A satellite with round-number orbit parameters for hand-checked tests."""
    return SatelliteState(
        id=sat_id,
        altitude_km=550.0,
        orbital_period_s=period,
        phase_offset=phase,
        eclipse_fraction=eclipse,
        battery_capacity_wh=battery,
        **kw,
    )


def eclipsed_sat(sat_id=0, **kw):
    """Satellite sitting in the middle of a wide eclipse window at t=0."""
    return make_sat(sat_id, eclipse=0.4, phase=math.pi, **kw)


def make_task(task_id=1, *, size=2.0, intensity=300e6, dtn=1.0,
              category=Category.SAT_TO_SAT, origin=0, t=0.0):
    return Task(task_id, category, size, intensity, dtn, origin, t)


@pytest.fixture
def tiny_config():
    """Small fast G1 variant for engine tests."""
    config = preset("G1")
    config.sim_duration_s = 600.0
    return config


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
