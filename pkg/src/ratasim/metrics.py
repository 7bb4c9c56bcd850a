"""Run statistics, report serialisation and power-law scaling fits."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .domain import Category, Resource, SatelliteState, Task, TaskStatus, render_block_reason

SECONDS_PER_HOUR = 3600.0

# Reference scaling laws, kept as a fixture to compare against fitted ones.
# They do not reproduce the group results they were quoted next to.
REFERENCE_SCALING_LAWS = {
    "sat_to_sat_blocking_pct": (0.78, 1.18),
    "sat_to_gnd_response_avg_h": (0.065, 2.34),
    "tasks_per_wh_per_sat": (156.0, -1.07),
}


class PowerLaw(NamedTuple):
    coefficient: float
    exponent: float

    def predict(self, x):
        return self.coefficient * np.power(x, self.exponent)


def fit_power_law(points: Iterable[tuple[float, float]]) -> PowerLaw:
    """Least-squares fit of ``y = a * x**b`` in log-log space."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError(f"power-law fit needs at least 2 points, got {len(pts)}")
    if any(not (x > 0 and y > 0) for x, y in pts):
        raise ValueError("power-law fit requires strictly positive x and y")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    if np.ptp(lx) == 0:
        raise ValueError("power-law fit needs at least two distinct x values")
    design = np.column_stack([np.ones_like(lx), lx])
    (intercept, slope), *_ = np.linalg.lstsq(design, ly, rcond=None)
    return PowerLaw(float(math.exp(intercept)), float(slope))


@dataclass
class CategoryStats:
    generated: int = 0
    completed: int = 0
    blocked: int = 0
    blocking_pct: float = 0.0
    reason_histogram: dict[str, int] = field(default_factory=dict)
    response_avg_h: Optional[float] = None
    response_max_h: Optional[float] = None
    # satellite processing only, without ISL or ground legs
    processing_avg_h: Optional[float] = None
    cooperative: int = 0
    root_only: int = 0


@dataclass
class SatelliteEnergy:
    id: int
    capacity_wh: float
    battery_end_wh: float
    consumed_wh: float
    recharged_wh: float
    net_wh: float
    capacity_used_pct: float
    recharge_efficiency_pct: Optional[float]
    shortfall_wh: float
    wasted_recharge_wh: float
    sunlit_work_pct: Optional[float]


@dataclass
class EnergySummary:
    """Per-satellite means, plus totals and extremes across the fleet."""

    consumed_wh: float
    recharged_wh: float
    net_wh: float
    capacity_used_pct: float
    recharge_efficiency_pct: Optional[float]
    max_abs_net_wh: float
    total_consumed_wh: float
    total_recharged_wh: float
    shortfall_wh: float
    sunlit_work_pct: Optional[float]
    energy_blocking_pct: float


@dataclass
class ChannelSummary:
    transfers: int
    busy_s: float
    first_request_s: Optional[float]
    last_done_s: Optional[float]
    # sum of transfer durations minus the first request time
    serialization_bound_s: Optional[float]


@dataclass
class MetricsReport:
    meta: dict[str, Any]
    categories: dict[str, CategoryStats]
    overall: dict[str, Any]
    energy: EnergySummary
    satellites: list[SatelliteEnergy]
    channel: ChannelSummary

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def flat_row(self) -> dict[str, Any]:
        """One flat CSV row: blocking, response and energy columns."""
        row: dict[str, Any] = {
            "group": self.meta["group"],
            "satellites": self.meta["satellite_count"],
            "seed": self.meta["seed"],
            "generated": self.overall["generated"],
            "blocked": self.overall["blocked"],
            "overall_blocking_pct": self.overall["blocking_pct"],
        }
        for cat in Category:
            s = self.categories[cat.value]
            key = _snake(cat)
            row[f"{key}_blocking_pct"] = s.blocking_pct
            row[f"{key}_response_avg_h"] = s.response_avg_h
            row[f"{key}_response_max_h"] = s.response_max_h
        e = self.energy
        row.update(
            energy_consumed_wh=e.consumed_wh,
            capacity_used_pct=e.capacity_used_pct,
            energy_recharged_wh=e.recharged_wh,
            recharge_efficiency_pct=e.recharge_efficiency_pct,
            net_energy_wh=e.net_wh,
            energy_blocking_pct=e.energy_blocking_pct,
            sunlit_work_pct=e.sunlit_work_pct,
        )
        return row


def _snake(cat: Category) -> str:
    return {"SatToSat": "sat_to_sat", "SatToGnd": "sat_to_gnd", "GndToSat": "gnd_to_sat"}[cat.value]


def _pct(num: float, den: float) -> float:
    return 100.0 * num / den if den > 0 else 0.0


def _category_stats(tasks: Sequence[Task]) -> CategoryStats:
    stats = CategoryStats(generated=len(tasks))
    responses = []
    processing = []
    for t in tasks:
        if t.status is TaskStatus.BLOCKED:
            stats.blocked += 1
            reason = render_block_reason(t.blocking_reason)
            stats.reason_histogram[reason] = stats.reason_histogram.get(reason, 0) + 1
        elif t.status is TaskStatus.COMPLETED:
            stats.completed += 1
            responses.append(t.completion_time_s - t.arrival_time_s)
            if t.processing_s > 0:
                processing.append(t.processing_s)
        if t.mode is not None:
            if t.mode.value == "Cooperative":
                stats.cooperative += 1
            elif t.mode.value == "RootOnly":
                stats.root_only += 1
    stats.blocking_pct = _pct(stats.blocked, stats.generated)
    stats.reason_histogram = dict(sorted(stats.reason_histogram.items()))
    if responses:
        stats.response_avg_h = math.fsum(responses) / len(responses) / SECONDS_PER_HOUR
        stats.response_max_h = max(responses) / SECONDS_PER_HOUR
    if processing:
        stats.processing_avg_h = math.fsum(processing) / len(processing) / SECONDS_PER_HOUR
    return stats


def _satellite_energy(sat: SatelliteState) -> SatelliteEnergy:
    return SatelliteEnergy(
        id=sat.id,
        capacity_wh=sat.battery_capacity_wh,
        battery_end_wh=sat.battery_level_wh,
        consumed_wh=sat.cum_consumed_wh,
        recharged_wh=sat.cum_recharged_wh,
        net_wh=sat.cum_recharged_wh - sat.cum_consumed_wh,
        capacity_used_pct=_pct(sat.cum_consumed_wh, sat.battery_capacity_wh),
        recharge_efficiency_pct=(
            _pct(sat.cum_recharged_wh, sat.cum_consumed_wh) if sat.cum_consumed_wh > 0 else None
        ),
        shortfall_wh=sat.shortfall_wh,
        wasted_recharge_wh=sat.wasted_recharge_wh,
        sunlit_work_pct=_pct(sat.sunlit_work_s, sat.total_work_s) if sat.total_work_s > 0 else None,
    )


def summarize(sim) -> MetricsReport:
    """Build the report for a finished :class:`~ratasim.engine.Simulation`."""
    return summarize_run(
        list(sim.tasks.values()),
        sim.satellites,
        sim.channel.queue_log,
        meta={
            "group": sim.config.group_id,
            "seed": sim.seed,
            "satellite_count": sim.config.satellite_count,
            "sltn_count": sim.config.sltn_count,
            "arrival_rate_tasks_per_s": sim.config.arrival_rate_tasks_per_s,
            "duration_s": sim.config.sim_duration_s,
            "end_time_s": sim.clock,
            "idle_recharge": sim.config.idle_recharge,
        },
    )


def summarize_run(
    tasks: Sequence[Task],
    satellites: Sequence[SatelliteState],
    channel_log: Sequence = (),
    meta: Optional[dict[str, Any]] = None,
) -> MetricsReport:
    by_cat: dict[Category, list[Task]] = {c: [] for c in Category}
    for t in tasks:
        by_cat[t.category].append(t)
    categories = {c.value: _category_stats(by_cat[c]) for c in Category}
    generated = len(tasks)
    blocked = sum(s.blocked for s in categories.values())
    overall = {
        "generated": generated,
        "completed": sum(s.completed for s in categories.values()),
        "blocked": blocked,
        "blocking_pct": _pct(blocked, generated),
        "no_traffic": generated == 0,
    }

    sats = [_satellite_energy(s) for s in satellites]
    n = max(1, len(sats))
    total_cons = math.fsum(s.consumed_wh for s in sats)
    total_rech = math.fsum(s.recharged_wh for s in sats)
    sunlit = math.fsum(s.sunlit_work_s for s in satellites)
    work = math.fsum(s.total_work_s for s in satellites)
    energy_blocks = sum(
        1 for t in tasks
        if t.status is TaskStatus.BLOCKED and t.blocking_reason.resource is Resource.ENERGY
    )
    energy = EnergySummary(
        consumed_wh=total_cons / n,
        recharged_wh=total_rech / n,
        net_wh=(total_rech - total_cons) / n,
        capacity_used_pct=math.fsum(s.capacity_used_pct for s in sats) / n,
        recharge_efficiency_pct=_pct(total_rech, total_cons) if total_cons > 0 else None,
        max_abs_net_wh=max((abs(s.net_wh) for s in sats), default=0.0),
        total_consumed_wh=total_cons,
        total_recharged_wh=total_rech,
        shortfall_wh=math.fsum(s.shortfall_wh for s in sats) / n,
        sunlit_work_pct=_pct(sunlit, work) if work > 0 else None,
        energy_blocking_pct=_pct(energy_blocks, blocked),
    )

    busy = math.fsum(r.done_t - r.start_t for r in channel_log)
    first = channel_log[0].request_t if channel_log else None
    channel = ChannelSummary(
        transfers=len(channel_log),
        busy_s=busy,
        first_request_s=first,
        last_done_s=channel_log[-1].done_t if channel_log else None,
        serialization_bound_s=busy - first if channel_log else None,
    )
    return MetricsReport(dict(meta or {}), categories, overall, energy, sats, channel)


# ---------------------------------------------------------------- sweeps

SWEEP_METRICS = (
    "overall_blocking_pct",
    "sat_to_sat_blocking_pct",
    "sat_to_gnd_blocking_pct",
    "gnd_to_sat_blocking_pct",
    "sat_to_sat_response_avg_h",
    "sat_to_sat_response_max_h",
    "sat_to_gnd_response_avg_h",
    "sat_to_gnd_response_max_h",
    "gnd_to_sat_response_avg_h",
    "gnd_to_sat_response_max_h",
    "energy_consumed_wh",
    "capacity_used_pct",
    "energy_recharged_wh",
    "recharge_efficiency_pct",
    "net_energy_wh",
    "energy_blocking_pct",
    "sunlit_work_pct",
)

FIT_TARGETS = (
    "sat_to_sat_blocking_pct",
    "overall_blocking_pct",
    "sat_to_gnd_response_avg_h",
    "gnd_to_sat_response_avg_h",
)


def _mean(values: list) -> Optional[float]:
    vals = [v for v in values if v is not None]
    return math.fsum(vals) / len(vals) if vals else None


def aggregate(reports: Sequence[MetricsReport]) -> list[dict[str, Any]]:
    """Mean, min and max of each metric per group, in first-seen group order."""
    groups: dict[str, list[dict[str, Any]]] = {}
    for r in reports:
        groups.setdefault(r.meta["group"], []).append(r.flat_row())
    out = []
    for group, rows in groups.items():
        row: dict[str, Any] = {
            "group": group,
            "satellites": rows[0]["satellites"],
            "seeds": len(rows),
            "generated": _mean([r["generated"] for r in rows]),
            "blocked": _mean([r["blocked"] for r in rows]),
        }
        for m in SWEEP_METRICS:
            vals = [r[m] for r in rows]
            present = [v for v in vals if v is not None]
            row[m] = _mean(vals)
            row[f"{m}_min"] = min(present) if present else None
            row[f"{m}_max"] = max(present) if present else None
        out.append(row)
    return out


def scaling_fits(rows: Sequence[dict[str, Any]]) -> list[dict[str, Any]]:
    """Fit ``metric = a * satellites**b`` across the aggregated group rows."""
    fits = []
    for metric in FIT_TARGETS:
        pts = [(r["satellites"], r[metric]) for r in rows if r.get(metric) and r[metric] > 0]
        if len({x for x, _ in pts}) < 2:
            fits.append({"metric": metric, "coefficient": None, "exponent": None, "points": len(pts)})
            continue
        law = fit_power_law(pts)
        fits.append(
            {"metric": metric, "coefficient": law.coefficient, "exponent": law.exponent, "points": len(pts)}
        )
    return fits


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[dict[str, Any]], fits: Optional[Sequence[dict[str, Any]]] = None) -> str:
    """Group rows, then (optionally) a blank line and a fit summary block."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        header = list(rows[0])
        writer.writerow(header)
        for r in rows:
            writer.writerow([_fmt(r.get(k)) for k in header])
    if fits is not None:
        writer.writerow([])
        writer.writerow(["metric", "coefficient", "exponent", "points"])
        for f in fits:
            writer.writerow([f["metric"], _fmt(f["coefficient"]), _fmt(f["exponent"]), f["points"]])
    return buf.getvalue()
