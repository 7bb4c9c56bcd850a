"""Shared ground-station channel (FIFO, single server) and ISL transfer times."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
import math
from pathlib import Path
from typing import NamedTuple

from .domain import Leg, SimulationFault

MB_PER_GB = 1024.0


class ChannelRecord(NamedTuple):
    task_id: int
    leg: Leg
    request_t: float
    start_t: float
    done_t: float


def transfer_duration(size_gb: float, bandwidth_mbps: float) -> float:
    return size_gb * MB_PER_GB / bandwidth_mbps


def isl_transfer_time(size_gb: float, isl_bandwidth_mbps: float) -> float:
    """Inter-satellite link time; links are dedicated so nothing queues."""
    return transfer_duration(size_gb, isl_bandwidth_mbps)


def _add_exact(partials: list[float], x: float) -> None:
    # Shewchuk's error-free summation; partials stay sorted by magnitude
    i = 0
    for y in partials:
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo:
            partials[i] = lo
            i += 1
        x = hi
    partials[i:] = [x]


@dataclass
class GroundChannel:
    """Single FIFO server shared by every ground transfer.

    Completion times follow ``done = max(request, previous done) + duration``
    evaluated exactly and rounded once, so a long back-to-back queue does
    not accumulate rounding error. The exact value of the current busy
    period is kept as non-overlapping float partials, as in ``math.fsum``.
    """

    bandwidth_mbps: float = 100.0
    busy_until_s: float = 0.0
    queue_log: list[ChannelRecord] = field(default_factory=list)
    _last_request: float = 0.0
    _partials: list[float] = field(default_factory=list)

    def transfer(self, task_id: int, leg: Leg, size_gb: float, t_request: float) -> float:
        """Queue one transfer and return its completion time."""
        if size_gb <= 0:
            raise SimulationFault(f"transfer of non-positive size {size_gb!r}")
        if t_request < self._last_request:
            raise SimulationFault(
                f"channel request at {t_request} precedes previous request at {self._last_request}"
            )
        self._last_request = t_request
        start = max(t_request, self.busy_until_s)
        if t_request > self.busy_until_s or (
            t_request == self.busy_until_s and math.fsum([*self._partials, -t_request]) < 0.0
        ):
            self._partials = [t_request]
        _add_exact(self._partials, transfer_duration(size_gb, self.bandwidth_mbps))
        done = math.fsum(self._partials)
        self.busy_until_s = done
        self.queue_log.append(ChannelRecord(task_id, leg, t_request, start, done))
        return done

    def busy_time(self) -> float:
        return sum(r.done_t - r.start_t for r in self.queue_log)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["task_id", "leg", "request_t", "start_t", "done_t", "wait_s", "transfer_s"])
            for r in self.queue_log:
                writer.writerow([
                    r.task_id, r.leg.value, repr(r.request_t), repr(r.start_t), repr(r.done_t),
                    repr(r.start_t - r.request_t), repr(r.done_t - r.start_t),
                ])


def channel_transfer(
    channel: GroundChannel, task_id: int, leg: Leg, size_gb: float, t_request: float
) -> float:
    return channel.transfer(task_id, leg, size_gb, t_request)
