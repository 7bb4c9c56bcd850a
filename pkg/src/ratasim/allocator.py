"""Admission control, cooperative allocation and the per-satellite ledger.

Allocation is root first: ``copaa`` splits the distributable part of a
task equally between the root and every child that passes ``vrac``, and
falls back to running the whole task on the root when cooperation is not
possible. Resource pools are reserved by ``allocate`` and returned by
``release``; energy is settled separately by ``apply_energy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .config import AllocatorConfig
from .constellation import TWO_PI, recharge_rate, sunlit_time
from .domain import (
    FRACTION_TOL,
    BlockReason,
    LedgerEntry,
    Mode,
    Resource,
    SatelliteState,
    SimulationFault,
    Sltn,
    Task,
)
from .network import isl_transfer_time

DEFAULT_PARAMS = AllocatorConfig()
ENERGY_SAMPLES = 10


@dataclass(frozen=True)
class Admit:
    cores: int
    t_process_s: float
    e_net_wh: float


@dataclass(frozen=True)
class Reject:
    resource: Resource


VracOutcome = Union[Admit, Reject]


@dataclass(frozen=True)
class Participant:
    sat_id: int
    fraction: float
    # processing starts this long after allocation (ISL transfer for children)
    start_offset_s: float
    t_process_s: float


@dataclass
class AllocationResult:
    mode: Mode
    participants: list[Participant] = field(default_factory=list)
    finish_time_s: Optional[float] = None
    block_reason: Optional[BlockReason] = None

    @property
    def fractions(self) -> list[tuple[int, float]]:
        return [(p.sat_id, p.fraction) for p in self.participants]


def _check_fraction(fraction: float) -> None:
    if not 0.0 < fraction <= 1.0 + FRACTION_TOL:
        raise SimulationFault(f"fraction {fraction!r} outside (0, 1]")


def cores_for(fraction: float, full_cores: int = 4) -> int:
    return max(1, math.floor(full_cores * fraction))


def required_resources(
    task: Task, fraction: float, params: AllocatorConfig = DEFAULT_PARAMS
) -> tuple[int, float, float]:
    """Cores, memory (GB) and storage (GB) needed for ``fraction`` of ``task``."""
    _check_fraction(fraction)
    cores = cores_for(fraction, params.full_task_cores)
    memory = task.size_gb * params.memory_multiplier * fraction
    storage = task.size_gb * params.storage_multiplier * fraction
    return cores, memory, storage


def fraction_flops(task: Task, fraction: float) -> float:
    return task.intensity_flop_per_mb * task.size_gb * 1024.0 * fraction


def estimate_processing_time(
    task: Task, sat: SatelliteState, fraction: float, params: AllocatorConfig = DEFAULT_PARAMS
) -> float:
    """Seconds for ``sat`` to process ``fraction`` of ``task`` with parallel cores."""
    k = cores_for(fraction, params.full_task_cores)
    return fraction_flops(task, fraction) / (sat.compute_speed_gflops * k * 1e9)


def estimate_energy_wh(task: Task, sat: SatelliteState, fraction: float) -> float:
    return fraction_flops(task, fraction) * sat.energy_per_flop_j / 3600.0


def vrac(
    sat: SatelliteState,
    task: Task,
    fraction: float,
    t: float,
    params: AllocatorConfig = DEFAULT_PARAMS,
) -> VracOutcome:
    """Five-step admission check. Reads ``sat`` only.

    The net energy need is consumption minus the recharge expected over the
    processing time at the current rate, floored at zero.
    """
    cores, memory, storage = required_resources(task, fraction, params)
    return _admit(sat, cores, memory, storage, fraction_flops(task, fraction), t)


def _admit(
    sat: SatelliteState, cores: int, memory: float, storage: float, flops: float, t: float
) -> VracOutcome:
    if cores > sat.available_cores:
        return Reject(Resource.CORES)
    if memory > sat.available_memory_gb:
        return Reject(Resource.MEMORY)
    if storage > sat.available_storage_gb:
        return Reject(Resource.STORAGE)
    t_process = flops / (sat.compute_speed_gflops * cores * 1e9)
    e_consumed = flops * sat.energy_per_flop_j / 3600.0
    e_recharged = recharge_rate(sat, t) * t_process / 3600.0
    e_net = max(0.0, e_consumed - e_recharged)
    if e_net > sat.battery_level_wh:
        return Reject(Resource.ENERGY)
    return Admit(cores, t_process, e_net)


def _sync_pools(sat: SatelliteState) -> None:
    # recomputed from the ledger so repeated allocate/release cannot drift
    cores = 0
    memory = []
    storage = []
    for e in sat.ledger.values():
        cores += e.cores
        memory.append(e.memory_gb)
        storage.append(e.storage_gb)
    sat.available_cores = sat.total_cores - cores
    sat.available_memory_gb = sat.total_memory_gb - math.fsum(memory)
    sat.available_storage_gb = sat.total_storage_gb - math.fsum(storage)


def allocate(
    sat: SatelliteState,
    task: Task,
    fraction: float,
    completion_time: float,
    params: AllocatorConfig = DEFAULT_PARAMS,
) -> None:
    if task.id in sat.ledger:
        raise SimulationFault(f"double allocation of task {task.id} on satellite {sat.id}")
    cores, memory, storage = required_resources(task, fraction, params)
    if (
        cores > sat.available_cores
        or memory > sat.available_memory_gb
        or storage > sat.available_storage_gb
    ):
        raise SimulationFault(
            f"allocation without admission: task {task.id} on satellite {sat.id}"
        )
    sat.ledger[task.id] = LedgerEntry(task.id, cores, memory, storage, fraction, completion_time)
    _sync_pools(sat)
    sat.idle_since_s = None


def release(sat: SatelliteState, task_id: int, t: Optional[float] = None) -> None:
    """Return the pools recorded for ``task_id``. Battery is left untouched."""
    entry = sat.ledger.pop(task_id, None)
    if entry is None:
        raise SimulationFault(f"release of untracked task {task_id} on satellite {sat.id}")
    _sync_pools(sat)
    if not sat.ledger:
        sat.idle_since_s = entry.completion_time_s if t is None else t


def _settle(sat: SatelliteState, recharge: float, consumed: float) -> None:
    level = sat.battery_level_wh + recharge - consumed
    credited = recharge
    if level > sat.battery_capacity_wh:
        overflow = level - sat.battery_capacity_wh
        sat.wasted_recharge_wh += overflow
        credited -= overflow
        level = sat.battery_capacity_wh
    elif level < 0.0:
        sat.shortfall_wh += -level
        level = 0.0
    sat.battery_level_wh = level
    sat.cum_recharged_wh += credited


def apply_energy(
    sat: SatelliteState, task: Task, fraction: float, t_start: float, t_process: float
) -> None:
    """Settle the energy of one processed fraction using 10 midpoint samples."""
    if t_process <= 0:
        raise SimulationFault(f"non-positive processing time {t_process!r}")
    step = t_process / ENERGY_SAMPLES
    consumed = estimate_energy_wh(task, sat, fraction)
    e_step = consumed / ENERGY_SAMPLES
    sunlit_step = sat.recharge_watts * step / 3600.0
    # inlined in_sunlight(): this loop dominates long runs
    period = sat.orbital_period_s
    half_window = math.pi * sat.eclipse_fraction
    for i in range(ENERGY_SAMPLES):
        theta = (TWO_PI * (t_start + (i + 0.5) * step) / period + sat.phase_offset) % TWO_PI
        if abs(theta - math.pi) < half_window:
            _settle(sat, 0.0, e_step)
        else:
            sat.sunlit_work_s += step
            _settle(sat, sunlit_step, e_step)
    sat.total_work_s += t_process
    sat.cum_consumed_wh += consumed


def idle_recharge(sat: SatelliteState, t: float) -> None:
    """Credit solar input for the idle stretch since the last release."""
    if sat.idle_since_s is None or t <= sat.idle_since_s:
        return
    gained = sat.recharge_watts * sunlit_time(sat, sat.idle_since_s, t) / 3600.0
    sat.idle_since_s = t
    if gained > 0.0:
        _settle(sat, gained, 0.0)


def finish_time(
    root_t_process: float, child_legs: list[tuple[float, float, float]]
) -> float:
    """Completion delay: slowest of the root and each child's transfer-process-return leg."""
    return max([root_t_process, *(tr + proc + back for tr, proc, back in child_legs)])


def root_only_fallback(
    root: SatelliteState, task: Task, t: float, params: AllocatorConfig = DEFAULT_PARAMS
) -> AllocationResult:
    outcome = vrac(root, task, 1.0, t, params)
    if isinstance(outcome, Reject):
        return AllocationResult(Mode.BLOCKED, block_reason=BlockReason(outcome.resource, Mode.ROOT_ONLY))
    allocate(root, task, 1.0, t + outcome.t_process_s, params)
    return AllocationResult(
        Mode.ROOT_ONLY,
        participants=[Participant(root.id, 1.0, 0.0, outcome.t_process_s)],
        finish_time_s=outcome.t_process_s,
    )


def copaa(
    sltn: Sltn,
    satellites: Mapping[int, SatelliteState],
    task: Task,
    t: float,
    params: AllocatorConfig = DEFAULT_PARAMS,
) -> AllocationResult:
    """Cooperative allocation over one SLTN, falling back to root-only."""
    root = satellites[sltn.root_id]
    n = len(sltn.child_ids)
    child_fraction = task.dtn_fraction / (n + 1)
    accepted: list[tuple[SatelliteState, Admit]] = []
    if n and child_fraction > 0.0:
        need = required_resources(task, child_fraction, params)
        flops = fraction_flops(task, child_fraction)
        for cid in sltn.child_ids:
            child = satellites[cid]
            outcome = _admit(child, *need, flops, t)
            if isinstance(outcome, Admit):
                accepted.append((child, outcome))
    if accepted:
        root_fraction = 1.0 - len(accepted) * child_fraction
        root_outcome = vrac(root, task, root_fraction, t, params)
        if isinstance(root_outcome, Admit):
            legs = []
            plan = [Participant(root.id, root_fraction, 0.0, root_outcome.t_process_s)]
            for child, outcome in accepted:
                t_tr = isl_transfer_time(child_fraction * task.size_gb, params.isl_bandwidth_mbps)
                legs.append((t_tr, outcome.t_process_s, params.result_ratio * t_tr))
                plan.append(Participant(child.id, child_fraction, t_tr, outcome.t_process_s))
            finish = finish_time(root_outcome.t_process_s, legs)
            allocate(root, task, root_fraction, t + finish, params)
            for child, _ in accepted:
                allocate(child, task, child_fraction, t + finish, params)
            return AllocationResult(Mode.COOPERATIVE, participants=plan, finish_time_s=finish)
    return root_only_fallback(root, task, t, params)
