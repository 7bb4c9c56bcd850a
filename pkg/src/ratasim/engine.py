"""Discrete-event loop routing tasks through the channel and the allocator."""

from __future__ import annotations

import heapq
import logging
from typing import Callable, Optional, Sequence

import numpy as np

from . import allocator
from .allocator import AllocationResult
from .config import GroupConfig
from .constellation import build_constellation, elect_root, form_sltns
from .domain import (
    Category,
    Event,
    EventKind,
    Leg,
    Mode,
    SatelliteState,
    SimulationFault,
    Sltn,
    Task,
    TaskStatus,
)
from .metrics import MetricsReport, summarize
from .network import GroundChannel
from .workload import generate_arrivals

log = logging.getLogger(__name__)

Observer = Callable[["Simulation", Event], None]


def seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent generators for constellation, workload and routing."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.default_rng(s) for s in children)


class Simulation:
    """One run's mutable state. Build it, call :meth:`run`, read the fields."""

    def __init__(
        self,
        config: GroupConfig,
        seed: int,
        arrivals: Optional[Sequence[Task]] = None,
        record_trace: bool = False,
        observer: Optional[Observer] = None,
    ):
        self.config = config.validate()
        self.seed = seed
        const_rng, work_rng, self.route_rng = seed_streams(seed)
        self.satellites: list[SatelliteState] = build_constellation(config, const_rng)
        self.sat_by_id = {s.id: s for s in self.satellites}
        self.sltns: list[Sltn] = form_sltns(self.satellites, config.sltn_count)
        self.sltn_of = {sid: sl for sl in self.sltns for sid in sl.members}
        if arrivals is None:
            arrivals = generate_arrivals(config, work_rng)
        self.tasks: dict[int, Task] = {t.id: t for t in arrivals}
        self.channel = GroundChannel(config.ground_bandwidth_mbps)
        self.params = config.allocator
        self.clock = 0.0
        self.trace: Optional[list[tuple[float, int, str, Optional[int]]]] = [] if record_trace else None
        self.observer = observer
        self.battery_at_window_end: Optional[list[float]] = None
        self._queue: list[tuple[float, int, Event]] = []
        self._seq = 0
        self._active: dict[int, tuple[float, AllocationResult]] = {}

    def _schedule(self, time_s: float, kind: EventKind, task_id=None, leg=None) -> None:
        # plain tuples keep heap comparisons cheap; seq makes ties unique
        heapq.heappush(self._queue, (time_s, self._seq, Event(time_s, self._seq, kind, task_id, leg)))
        self._seq += 1

    def run(self) -> "Simulation":
        for task in sorted(self.tasks.values(), key=lambda t: (t.arrival_time_s, t.id)):
            self._schedule(task.arrival_time_s, EventKind.TASK_ARRIVAL, task.id)
        self._schedule(self.config.sim_duration_s, EventKind.SIM_END)
        while self._queue:
            event = heapq.heappop(self._queue)[2]
            if event.time_s < self.clock:
                raise SimulationFault(f"clock moved backwards to {event.time_s}")
            self.clock = event.time_s
            if self.trace is not None:
                self.trace.append((event.time_s, event.seq, event.kind.value, event.task_id))
            self._dispatch(event)
            if self.observer is not None:
                self.observer(self, event)
        if self.config.idle_recharge:
            for sat in self.satellites:
                allocator.idle_recharge(sat, self.clock)
        return self

    def _dispatch(self, event: Event) -> None:
        kind = event.kind
        if kind is EventKind.TASK_ARRIVAL:
            self._on_arrival(self.tasks[event.task_id])
        elif kind is EventKind.SAT_COMPLETION:
            self._on_sat_completion(self.tasks[event.task_id])
        elif kind is EventKind.GROUND_TRANSFER_DONE:
            self._on_transfer_done(self.tasks[event.task_id], event.leg)
        elif kind is EventKind.SIM_END:
            if self.config.idle_recharge:
                for sat in self.satellites:
                    allocator.idle_recharge(sat, self.clock)
            self.battery_at_window_end = [s.battery_level_wh for s in self.satellites]

    def _on_arrival(self, task: Task) -> None:
        t = self.clock
        if task.category is Category.SAT_TO_SAT:
            self._allocate(task, self.sltn_of[task.origin])
        elif task.category is Category.SAT_TO_GND:
            task.status = TaskStatus.IN_TRANSFER
            done = self.channel.transfer(task.id, Leg.DOWNLINK, task.size_gb, t)
            self._schedule(done, EventKind.GROUND_TRANSFER_DONE, task.id, Leg.DOWNLINK)
        else:
            task.status = TaskStatus.IN_TRANSFER
            done = self.channel.transfer(task.id, Leg.UPLINK, task.size_gb, t)
            self._schedule(done, EventKind.GROUND_TRANSFER_DONE, task.id, Leg.UPLINK)

    def _on_transfer_done(self, task: Task, leg: Leg) -> None:
        if leg is Leg.UPLINK:
            target = self.sltns[int(self.route_rng.integers(len(self.sltns)))]
            self._allocate(task, target)
        else:
            # ground side processing is free and instantaneous
            self._complete(task)

    def _allocate(self, task: Task, sltn: Sltn) -> None:
        t = self.clock
        if self.config.idle_recharge:
            for sid in sltn.members:
                allocator.idle_recharge(self.sat_by_id[sid], t)
        if self.config.root_policy == "dynamic":
            sltn = elect_root(sltn, self.sat_by_id)
        result = allocator.copaa(sltn, self.sat_by_id, task, t, self.params)
        task.mode = result.mode
        if result.mode is Mode.BLOCKED:
            task.status = TaskStatus.BLOCKED
            task.blocking_reason = result.block_reason
            return
        task.status = TaskStatus.PROCESSING
        task.participants = result.fractions
        task.processing_s = max(p.t_process_s for p in result.participants)
        self._active[task.id] = (t, result)
        self._schedule(t + result.finish_time_s, EventKind.SAT_COMPLETION, task.id)

    def _on_sat_completion(self, task: Task) -> None:
        t = self.clock
        t_alloc, result = self._active.pop(task.id)
        for p in result.participants:
            sat = self.sat_by_id[p.sat_id]
            allocator.apply_energy(sat, task, p.fraction, t_alloc + p.start_offset_s, p.t_process_s)
            allocator.release(sat, task.id, t)
        if task.category is Category.GND_TO_SAT:
            size = self.params.result_ratio * task.size_gb
            if size > 0:
                task.status = TaskStatus.IN_TRANSFER
                done = self.channel.transfer(task.id, Leg.RESULT_DOWNLINK, size, t)
                self._schedule(done, EventKind.GROUND_TRANSFER_DONE, task.id, Leg.RESULT_DOWNLINK)
                return
        self._complete(task)

    def _complete(self, task: Task) -> None:
        task.status = TaskStatus.COMPLETED
        task.completion_time_s = self.clock

    def report(self) -> MetricsReport:
        return summarize(self)


def run(
    config: GroupConfig,
    seed: int,
    arrivals: Optional[Sequence[Task]] = None,
) -> MetricsReport:
    """Simulate one group to quiescence and summarise it."""
    sim = Simulation(config, seed, arrivals=arrivals).run()
    log.debug("run %s seed %d finished at t=%.1f s", config.group_id, seed, sim.clock)
    return sim.report()
