"""Run configuration: group presets, hardware defaults and TOML loading."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .domain import Category, ConfigError

Range = tuple[float, float]


@dataclass
class HardwareConfig:
    """Per-satellite hardware. Ranges with equal ends give a homogeneous fleet."""

    compute_speed_gflops: float = 20.0
    total_cores: int = 4
    memory_gb: float = 128.0
    storage_gb: float = 512.0
    battery_capacity_wh: Range = (280.0, 280.0)
    recharge_watts: Range = (100.0, 100.0)
    energy_per_flop_j: Range = (5e-9, 5e-9)
    # carried for completeness; the phase-window eclipse model ignores it
    inclination_deg: Range = (49.0, 87.0)
    link_rate_mbps: float = 100.0


@dataclass
class AllocatorConfig:
    full_task_cores: int = 4
    memory_multiplier: float = 1.0
    storage_multiplier: float = 1.0
    result_ratio: float = 0.1
    isl_bandwidth_mbps: float = 50.0


@dataclass
class WorkloadConfig:
    size_gb: dict[str, Range] = field(
        default_factory=lambda: {
            Category.SAT_TO_SAT.value: (2.0, 15.0),
            Category.SAT_TO_GND.value: (3.0, 50.0),
            Category.GND_TO_SAT.value: (1.0, 8.0),
        }
    )
    dtn: dict[str, Range] = field(
        default_factory=lambda: {
            Category.SAT_TO_SAT.value: (0.3, 1.0),
            Category.SAT_TO_GND.value: (0.0, 0.0),
            Category.GND_TO_SAT.value: (0.3, 1.0),
        }
    )
    intensity_flop_per_mb: Range = (25e6, 125e6)
    # "uniform" or "loguniform"
    intensity_distribution: str = "uniform"
    size_distribution: str = "uniform"


@dataclass
class GroupConfig:
    group_id: str
    satellite_count: int
    sltn_count: int
    altitude_range_km: Range
    arrival_rate_tasks_per_s: float
    sim_duration_s: float = 6000.0
    category_mix: tuple[float, float, float] = (0.40, 0.30, 0.30)
    beta_angle: float = 0.0
    ground_bandwidth_mbps: float = 100.0
    idle_recharge: bool = True
    # "static": root fixed at formation; "dynamic": re-elected per allocation
    root_policy: str = "dynamic"
    hardware: HardwareConfig = field(default_factory=HardwareConfig)
    allocator: AllocatorConfig = field(default_factory=AllocatorConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)

    def validate(self) -> "GroupConfig":
        if self.satellite_count < 1:
            raise ConfigError("satellite_count must be >= 1")
        if not 1 <= self.sltn_count <= self.satellite_count:
            raise ConfigError(
                f"sltn_count must lie in [1, {self.satellite_count}], got {self.sltn_count}"
            )
        lo, hi = self.altitude_range_km
        if not 500.0 <= lo <= hi <= 2000.0:
            raise ConfigError(f"altitude range {self.altitude_range_km} outside [500, 2000] km")
        if self.arrival_rate_tasks_per_s <= 0:
            raise ConfigError("arrival rate must be positive")
        if self.sim_duration_s < 0:
            raise ConfigError("sim_duration_s must be >= 0")
        if len(self.category_mix) != 3 or any(not 0.0 <= p <= 1.0 for p in self.category_mix):
            raise ConfigError("category_mix needs three probabilities in [0, 1]")
        if abs(sum(self.category_mix) - 1.0) > 1e-9:
            raise ConfigError(f"category_mix sums to {sum(self.category_mix)}, expected 1")
        if abs(self.beta_angle) >= math.pi / 2:
            raise ConfigError("|beta_angle| must be below pi/2")
        if self.ground_bandwidth_mbps <= 0 or self.allocator.isl_bandwidth_mbps <= 0:
            raise ConfigError("bandwidths must be positive")
        if self.hardware.compute_speed_gflops <= 0 or self.hardware.total_cores < 1:
            raise ConfigError("compute speed and core count must be positive")
        if self.root_policy not in ("static", "dynamic"):
            raise ConfigError(f"unknown root_policy {self.root_policy!r}")
        if self.workload.intensity_distribution not in ("uniform", "loguniform"):
            raise ConfigError(
                f"unknown intensity_distribution {self.workload.intensity_distribution!r}"
            )
        if self.workload.size_distribution not in ("uniform", "loguniform"):
            raise ConfigError(f"unknown size_distribution {self.workload.size_distribution!r}")
        for name, (a, b) in self.workload.dtn.items():
            if not 0.0 <= a <= b <= 1.0:
                raise ConfigError(f"dtn range for {name} must satisfy 0 <= min <= max <= 1")
        for name, (a, b) in self.workload.size_gb.items():
            if not 0.0 < a <= b:
                raise ConfigError(f"size range for {name} must be positive and ordered")
        return self


# rates are the target task totals divided by the 6000 s window
PRESETS: dict[str, dict[str, Any]] = {
    "G1": dict(satellite_count=20, sltn_count=1, altitude_range_km=(500.0, 800.0),
               arrival_rate_tasks_per_s=0.250),
    "G2": dict(satellite_count=55, sltn_count=6, altitude_range_km=(600.0, 1200.0),
               arrival_rate_tasks_per_s=1.624),
    "G3": dict(satellite_count=90, sltn_count=15, altitude_range_km=(800.0, 1600.0),
               arrival_rate_tasks_per_s=3.779),
    "G4": dict(satellite_count=120, sltn_count=29, altitude_range_km=(500.0, 2000.0),
               arrival_rate_tasks_per_s=16.335),
}

GROUPS = tuple(PRESETS)


def preset(group_id: str) -> GroupConfig:
    try:
        fields = PRESETS[group_id]
    except KeyError:
        raise ConfigError(f"unknown group {group_id!r}; choose from {', '.join(GROUPS)}") from None
    return GroupConfig(group_id=group_id, **fields)


_SECTIONS = {"hardware": HardwareConfig, "allocator": AllocatorConfig, "workload": WorkloadConfig}


def _coerce(value: Any, current: Any) -> Any:
    if isinstance(current, tuple):
        return tuple(float(v) for v in value)
    if isinstance(current, dict):
        merged = dict(current)
        for k, v in value.items():
            merged[k] = tuple(float(x) for x in v)
        return merged
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"expected boolean, got {value!r}")
        return value
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    return value


def _apply(target: Any, values: Mapping[str, Any], where: str) -> Any:
    known = {f.name: f for f in dataclasses.fields(target)}
    updates = {}
    for key, value in values.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in [{where}]")
        current = getattr(target, key)
        if key in _SECTIONS:
            if not isinstance(value, Mapping):
                raise ConfigError(f"[{key}] must be a table")
            updates[key] = _apply(current, value, key)
            continue
        try:
            updates[key] = _coerce(value, current)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {where}.{key}: {value!r}") from exc
    return dataclasses.replace(target, **updates)


def apply_overrides(config: GroupConfig, document: Mapping[str, Any]) -> GroupConfig:
    """Overlay a parsed config document on ``config``.

    Top-level keys and the ``[group]`` table override group fields; the
    ``[hardware]``, ``[allocator]`` and ``[workload]`` tables override their
    sub-configs. A ``[groups.G4]`` style table applies only to that group.
    """
    doc = dict(document)
    per_group = doc.pop("groups", {})
    group_table = doc.pop("group", {})
    config = _apply(config, {**doc, **group_table}, "group")
    if config.group_id in per_group:
        config = _apply(config, per_group[config.group_id], f"groups.{config.group_id}")
    return config


def load_document(path: str | Path) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def to_dict(config: GroupConfig) -> dict[str, Any]:
    return dataclasses.asdict(config)
