"""Core value types shared by the simulator modules."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

GROUND = "Ground"

FRACTION_TOL = 1e-9


class SimulationFault(RuntimeError):
    """A contract violation inside the simulation (exit code 3)."""


class ConfigError(ValueError):
    """Invalid configuration (exit code 2)."""


class Category(str, enum.Enum):
    SAT_TO_SAT = "SatToSat"
    SAT_TO_GND = "SatToGnd"
    GND_TO_SAT = "GndToSat"


class TaskStatus(str, enum.Enum):
    PENDING = "Pending"
    IN_TRANSFER = "InTransfer"
    PROCESSING = "Processing"
    COMPLETED = "Completed"
    BLOCKED = "Blocked"


class Resource(str, enum.Enum):
    CORES = "cores"
    MEMORY = "memory"
    STORAGE = "storage"
    ENERGY = "energy"
    NO_PARTICIPANTS = "participants"


class Mode(str, enum.Enum):
    COOPERATIVE = "Cooperative"
    ROOT_ONLY = "RootOnly"
    BLOCKED = "Blocked"


class Leg(str, enum.Enum):
    DOWNLINK = "Downlink"
    UPLINK = "Uplink"
    RESULT_DOWNLINK = "ResultDownlink"


@dataclass(frozen=True)
class BlockReason:
    resource: Resource
    mode: Mode

    def __str__(self) -> str:
        return render_block_reason(self)


_MODE_PREFIX = {Mode.COOPERATIVE: "Cooperative", Mode.ROOT_ONLY: "Root-only"}


def render_block_reason(reason: BlockReason) -> str:
    """Render a block reason, e.g. ``"Root-only: Insufficient cores"``."""
    return f"{_MODE_PREFIX[reason.mode]}: Insufficient {reason.resource.value}"


@dataclass
class LedgerEntry:
    task_id: int
    cores: int
    memory_gb: float
    storage_gb: float
    fraction: float
    completion_time_s: float


@dataclass
class SatelliteState:
    """Fixed hardware and live resource state of one satellite.

    ``cum_consumed_wh`` and ``cum_recharged_wh`` only ever grow. The
    recharge counter holds energy actually credited to the battery;
    recharge lost to a full battery is kept in ``wasted_recharge_wh`` and
    consumption that found the battery empty in ``shortfall_wh``.
    """

    id: int
    altitude_km: float
    orbital_period_s: float
    phase_offset: float
    eclipse_fraction: float
    battery_capacity_wh: float
    compute_speed_gflops: float = 20.0
    total_cores: int = 4
    total_memory_gb: float = 128.0
    total_storage_gb: float = 512.0
    recharge_watts: float = 100.0
    energy_per_flop_j: float = 5e-9
    available_cores: int = -1
    available_memory_gb: float = -1.0
    available_storage_gb: float = -1.0
    battery_level_wh: float = -1.0
    ledger: dict[int, LedgerEntry] = field(default_factory=dict)
    cum_consumed_wh: float = 0.0
    cum_recharged_wh: float = 0.0
    wasted_recharge_wh: float = 0.0
    shortfall_wh: float = 0.0
    sunlit_work_s: float = 0.0
    total_work_s: float = 0.0
    idle_since_s: Optional[float] = 0.0

    def __post_init__(self) -> None:
        if self.available_cores < 0:
            self.available_cores = self.total_cores
        if self.available_memory_gb < 0:
            self.available_memory_gb = self.total_memory_gb
        if self.available_storage_gb < 0:
            self.available_storage_gb = self.total_storage_gb
        if self.battery_level_wh < 0:
            self.battery_level_wh = self.battery_capacity_wh

    def allocated(self) -> tuple[int, float, float]:
        """Sum of (cores, memory, storage) recorded in the ledger."""
        cores = sum(e.cores for e in self.ledger.values())
        mem = sum(e.memory_gb for e in self.ledger.values())
        sto = sum(e.storage_gb for e in self.ledger.values())
        return cores, mem, sto

    def is_quiescent(self) -> bool:
        return (
            not self.ledger
            and self.available_cores == self.total_cores
            and abs(self.available_memory_gb - self.total_memory_gb) <= FRACTION_TOL
            and abs(self.available_storage_gb - self.total_storage_gb) <= FRACTION_TOL
        )


@dataclass
class Task:
    id: int
    category: Category
    size_gb: float
    intensity_flop_per_mb: float
    dtn_fraction: float
    origin: Union[int, str]
    arrival_time_s: float
    status: TaskStatus = TaskStatus.PENDING
    blocking_reason: Optional[BlockReason] = None
    participants: list[tuple[int, float]] = field(default_factory=list)
    completion_time_s: Optional[float] = None
    mode: Optional[Mode] = None
    processing_s: float = 0.0

    @property
    def flops(self) -> float:
        """Total workload of the whole task in FLOP."""
        return self.intensity_flop_per_mb * self.size_gb * 1024.0

    @property
    def response_time_s(self) -> Optional[float]:
        if self.completion_time_s is None:
            return None
        return self.completion_time_s - self.arrival_time_s


@dataclass
class Sltn:
    root_id: int
    child_ids: list[int]

    @property
    def members(self) -> list[int]:
        return [self.root_id, *self.child_ids]

    def __len__(self) -> int:
        return 1 + len(self.child_ids)


class EventKind(str, enum.Enum):
    TASK_ARRIVAL = "TaskArrival"
    SAT_COMPLETION = "SatCompletion"
    GROUND_TRANSFER_DONE = "GroundTransferDone"
    SIM_END = "SimEnd"


@dataclass(order=True)
class Event:
    time_s: float
    seq: int
    kind: EventKind = field(compare=False)
    task_id: Optional[int] = field(default=None, compare=False)
    leg: Optional[Leg] = field(default=None, compare=False)
