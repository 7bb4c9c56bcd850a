"""Orbital period, eclipse windows, solar recharge and SLTN formation."""

from __future__ import annotations

import math

import numpy as np

from .config import GroupConfig
from .domain import ConfigError, SatelliteState, Sltn

EARTH_RADIUS_KM = 6371.0
MU_EARTH = 3.986004418e14  # m^3 / s^2
TWO_PI = 2.0 * math.pi


def orbital_period(altitude_km: float) -> float:
    """Circular-orbit period in seconds from Kepler's third law."""
    if not 500.0 <= altitude_km <= 2000.0:
        raise ConfigError(f"altitude {altitude_km} km outside [500, 2000]")
    a = (EARTH_RADIUS_KM + altitude_km) * 1e3
    return TWO_PI * math.sqrt(a**3 / MU_EARTH)


def eclipse_fraction(altitude_km: float, beta: float = 0.0) -> float:
    """Fraction of the orbit spent in the cylindrical Earth shadow."""
    r = EARTH_RADIUS_KM + altitude_km
    if beta == 0.0:
        return math.asin(EARTH_RADIUS_KM / r) / math.pi
    arg = math.sqrt(altitude_km**2 + 2.0 * EARTH_RADIUS_KM * altitude_km) / (r * math.cos(beta))
    if arg > 1.0:
        return 0.0
    return math.acos(arg) / math.pi


def orbit_phase(sat: SatelliteState, t: float) -> float:
    return (TWO_PI * t / sat.orbital_period_s + sat.phase_offset) % TWO_PI


def in_sunlight(sat: SatelliteState, t: float) -> bool:
    # eclipse window is centred on the anti-solar phase
    theta = orbit_phase(sat, t)
    return not abs(theta - math.pi) < math.pi * sat.eclipse_fraction


def recharge_rate(sat: SatelliteState, t: float) -> float:
    return sat.recharge_watts if in_sunlight(sat, t) else 0.0


def _eclipsed_cycles(sat: SatelliteState, t: float) -> float:
    # eclipse measure (in orbit cycles) accumulated from cycle-phase 0 up to t
    u = t / sat.orbital_period_s + sat.phase_offset / TWO_PI
    lo = 0.5 * (1.0 - sat.eclipse_fraction)
    width = sat.eclipse_fraction
    whole = math.floor(u)
    return whole * width + min(max(u - whole - lo, 0.0), width)


def sunlit_time(sat: SatelliteState, t0: float, t1: float) -> float:
    """Seconds of sunlight within ``[t0, t1]``."""
    if t1 <= t0:
        return 0.0
    eclipsed = (_eclipsed_cycles(sat, t1) - _eclipsed_cycles(sat, t0)) * sat.orbital_period_s
    return max(0.0, (t1 - t0) - eclipsed)


def resource_score(sat: SatelliteState) -> float:
    return 0.25 * (
        sat.available_cores / sat.total_cores
        + sat.available_memory_gb / sat.total_memory_gb
        + sat.available_storage_gb / sat.total_storage_gb
        + sat.battery_level_wh / sat.battery_capacity_wh
    )


def form_sltns(satellites: list[SatelliteState], sltn_count: int) -> list[Sltn]:
    """Partition satellites into contiguous orbital-phase chunks.

    Chunk sizes differ by at most one. The member with the highest
    resource score becomes root, lowest id on ties.
    """
    if sltn_count < 1:
        raise ConfigError("sltn_count must be at least 1")
    if sltn_count > len(satellites):
        raise ConfigError(f"sltn_count {sltn_count} exceeds {len(satellites)} satellites")
    ordered = sorted(satellites, key=lambda s: (s.phase_offset, s.id))
    base, extra = divmod(len(ordered), sltn_count)
    sltns = []
    start = 0
    for i in range(sltn_count):
        size = base + (1 if i < extra else 0)
        chunk = ordered[start:start + size]
        start += size
        root = min(chunk, key=lambda s: (-resource_score(s), s.id))
        children = sorted(s.id for s in chunk if s.id != root.id)
        sltns.append(Sltn(root_id=root.id, child_ids=children))
    return sltns


def elect_root(sltn: Sltn, satellites) -> Sltn:
    """Same members, root re-chosen by current resource score (lowest id on ties)."""
    members = [satellites[i] for i in sltn.members]
    root = min(members, key=lambda s: (-resource_score(s), s.id))
    if root.id == sltn.root_id:
        return sltn
    return Sltn(root.id, sorted(s.id for s in members if s.id != root.id))


def _draw(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return lo if lo == hi else float(rng.uniform(lo, hi))


def build_constellation(config: GroupConfig, rng: np.random.Generator) -> list[SatelliteState]:
    """Create ``config.satellite_count`` satellites with random altitude and phase."""
    hw = config.hardware
    sats = []
    for i in range(config.satellite_count):
        altitude = _draw(rng, config.altitude_range_km)
        phase = float(rng.uniform(0.0, TWO_PI))
        sats.append(
            SatelliteState(
                id=i,
                altitude_km=altitude,
                orbital_period_s=orbital_period(altitude),
                phase_offset=phase,
                eclipse_fraction=eclipse_fraction(altitude, config.beta_angle),
                battery_capacity_wh=_draw(rng, hw.battery_capacity_wh),
                compute_speed_gflops=hw.compute_speed_gflops,
                total_cores=hw.total_cores,
                total_memory_gb=hw.memory_gb,
                total_storage_gb=hw.storage_gb,
                recharge_watts=_draw(rng, hw.recharge_watts),
                energy_per_flop_j=_draw(rng, hw.energy_per_flop_j),
            )
        )
    return sats
