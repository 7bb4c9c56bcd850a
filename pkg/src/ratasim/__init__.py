"""Discrete-event simulator for resource-aware task allocation on satellite constellations."""

from .config import GroupConfig, preset
from .engine import Simulation, run
from .metrics import MetricsReport, fit_power_law

__all__ = ["GroupConfig", "MetricsReport", "Simulation", "fit_power_law", "preset", "run"]
__version__ = "0.1.0"
