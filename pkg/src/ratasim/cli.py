"""Command line driver: single runs, seed replication and four-group sweeps.

Examples::

    ratasim --group G1 --seed 42 --format json --out report.json
    ratasim --sweep --seeds 5 --format csv --out sweep.csv
    ratasim --config custom.toml --group G4
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .config import GROUPS, GroupConfig, apply_overrides, load_document, preset
from .domain import ConfigError, SimulationFault
from .engine import Simulation
from .metrics import MetricsReport, aggregate, rows_to_csv, scaling_fits
from .workload import read_manifest, write_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAULT = 3

log = logging.getLogger("ratasim")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ratasim",
        description="Simulate resource-aware task allocation on a satellite constellation.",
    )
    p.add_argument("--group", choices=GROUPS, default="G1", help="group preset (default G1)")
    p.add_argument("--config", type=Path, help="TOML file overriding preset fields")
    p.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    p.add_argument("--seeds", type=int, default=1, metavar="N",
                   help="replications with seeds seed..seed+N-1 (default 1)")
    p.add_argument("--sweep", action="store_true", help="run every group G1-G4")
    p.add_argument("--duration", type=float, help="arrival window in seconds")
    p.add_argument("--rate", type=float, help="arrival rate in tasks/s")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=Path, help="output file (default stdout)")
    p.add_argument("--emit-arrivals", type=Path, metavar="PATH",
                   help="write the generated task stream as a CSV manifest")
    p.add_argument("--emit-queue-log", type=Path, metavar="PATH",
                   help="write the ground-channel queue log as CSV")
    p.add_argument("--replay-arrivals", type=Path, metavar="PATH",
                   help="replay a manifest instead of generating arrivals")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(group: str, args: argparse.Namespace, document: Optional[dict]) -> GroupConfig:
    config = preset(group)
    if document:
        config = apply_overrides(config, document)
    if args.duration is not None:
        config.sim_duration_s = args.duration
    if args.rate is not None:
        config.arrival_rate_tasks_per_s = args.rate
    return config.validate()


def _suffixed(path: Path, group: str, seed: int, multi: bool) -> Path:
    if not multi:
        return path
    return path.with_name(f"{path.stem}-{group}-{seed}{path.suffix}")


def _run_one(job: tuple) -> MetricsReport:
    config, seed, replay, arrivals_out, queue_out = job
    arrivals = read_manifest(replay) if replay else None
    sim = Simulation(config, seed, arrivals=arrivals)
    if arrivals_out:
        write_manifest(sorted(sim.tasks.values(), key=lambda t: t.id), arrivals_out)
    sim.run()
    if queue_out:
        sim.channel.write_csv(queue_out)
    return sim.report()


def execute(args: argparse.Namespace) -> str:
    document = load_document(args.config) if args.config else None
    groups = GROUPS if args.sweep else (args.group,)
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    seeds = [args.seed + i for i in range(args.seeds)]
    multi = len(groups) * len(seeds) > 1
    jobs = []
    for group in groups:
        config = resolve_config(group, args, document)
        for seed in seeds:
            jobs.append((
                config,
                seed,
                args.replay_arrivals,
                _suffixed(args.emit_arrivals, group, seed, multi) if args.emit_arrivals else None,
                _suffixed(args.emit_queue_log, group, seed, multi) if args.emit_queue_log else None,
            ))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = []
        for job in jobs:
            log.info("running %s seed %d", job[0].group_id, job[1])
            reports.append(_run_one(job))
    return render(reports, args.format, sweep=args.sweep)


def render(reports: Sequence[MetricsReport], fmt: str, sweep: bool = False) -> str:
    if fmt == "csv":
        if sweep:
            rows = aggregate(reports)
            return rows_to_csv(rows, scaling_fits(rows))
        return rows_to_csv([r.flat_row() for r in reports])
    if len(reports) == 1 and not sweep:
        return reports[0].to_json()
    rows = aggregate(reports)
    doc = {
        "groups": rows,
        "fits": scaling_fits(rows) if sweep else [],
        "runs": [r.to_dict() for r in reports],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        output = execute(args)
        if args.out:
            args.out.write_text(output)
        else:
            sys.stdout.write(output)
    except ConfigError as exc:
        print(f"ratasim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ratasim: I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationFault as exc:
        print(f"ratasim: simulation fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
