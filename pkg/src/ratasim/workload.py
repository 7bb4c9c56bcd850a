"""Poisson task arrivals with per-category size, intensity, DTN and origin."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .config import GroupConfig
from .domain import GROUND, Category, ConfigError, Task

CATEGORIES = (Category.SAT_TO_SAT, Category.SAT_TO_GND, Category.GND_TO_SAT)

MANIFEST_COLUMNS = ["task_id", "t", "category", "size_gb", "intensity_flop_per_mb", "dtn", "origin"]


@dataclass(frozen=True)
class CategoryProfile:
    category: Category
    size_range_gb: tuple[float, float]
    # informational only; energy follows from size and intensity
    energy_note_range_wh: tuple[float, float]
    dtn_range: tuple[float, float]
    mix_weight: float


def category_profiles(config: GroupConfig) -> list[CategoryProfile]:
    notes = {
        Category.SAT_TO_SAT: (0.5, 2.0),
        Category.SAT_TO_GND: (0.5, 2.5),
        Category.GND_TO_SAT: (0.3, 1.5),
    }
    wl = config.workload
    return [
        CategoryProfile(cat, wl.size_gb[cat.value], notes[cat], wl.dtn[cat.value], w)
        for cat, w in zip(CATEGORIES, config.category_mix)
    ]


def _sample(rng: np.random.Generator, bounds, n: int, distribution: str) -> np.ndarray:
    lo, hi = bounds
    if distribution == "loguniform":
        return np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    return rng.uniform(lo, hi, n)


def arrival_times(rate: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    """Event times of a Poisson process on ``[0, duration]``."""
    if duration <= 0:
        return np.empty(0)
    chunk = max(16, int(rate * duration * 1.1) + 64)
    times = np.cumsum(rng.exponential(1.0 / rate, chunk))
    while times[-1] <= duration:
        more = np.cumsum(rng.exponential(1.0 / rate, chunk)) + times[-1]
        times = np.concatenate([times, more])
    return times[times <= duration]


def generate_arrivals(config: GroupConfig, rng_seed) -> list[Task]:
    """Time-ordered task stream, fully determined by ``rng_seed``.

    ``rng_seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if config.arrival_rate_tasks_per_s <= 0:
        raise ConfigError("arrival rate must be positive")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    times = arrival_times(config.arrival_rate_tasks_per_s, config.sim_duration_s, rng)
    n = len(times)
    wl = config.workload
    cat_idx = rng.choice(3, size=n, p=np.asarray(config.category_mix, dtype=float))
    intensity = _sample(rng, wl.intensity_flop_per_mb, n, wl.intensity_distribution)
    origins = rng.integers(0, config.satellite_count, n)
    sizes = np.empty(n)
    dtns = np.empty(n)
    for i, profile in enumerate(category_profiles(config)):
        mask = cat_idx == i
        k = int(mask.sum())
        sizes[mask] = _sample(rng, profile.size_range_gb, k, wl.size_distribution)
        dtns[mask] = rng.uniform(*profile.dtn_range, k)
    tasks = []
    for i in range(n):
        cat = CATEGORIES[cat_idx[i]]
        tasks.append(
            Task(
                id=i,
                category=cat,
                size_gb=float(sizes[i]),
                intensity_flop_per_mb=float(intensity[i]),
                dtn_fraction=float(dtns[i]),
                origin=GROUND if cat is Category.GND_TO_SAT else int(origins[i]),
                arrival_time_s=float(times[i]),
            )
        )
    return tasks


def write_manifest(tasks: Iterable[Task], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for t in tasks:
            writer.writerow([
                t.id, repr(t.arrival_time_s), t.category.value, repr(t.size_gb),
                repr(t.intensity_flop_per_mb), repr(t.dtn_fraction), t.origin,
            ])


def read_manifest(path: str | Path) -> list[Task]:
    """Load a manifest written by ``write_manifest``; floats round-trip exactly."""
    tasks = []
    try:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                origin = row["origin"]
                tasks.append(
                    Task(
                        id=int(row["task_id"]),
                        category=Category(row["category"]),
                        size_gb=float(row["size_gb"]),
                        intensity_flop_per_mb=float(row["intensity_flop_per_mb"]),
                        dtn_fraction=float(row["dtn"]),
                        origin=origin if origin == GROUND else int(origin),
                        arrival_time_s=float(row["t"]),
                    )
                )
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read arrival manifest {path}: {exc}") from exc
    tasks.sort(key=lambda t: (t.arrival_time_s, t.id))
    return tasks
