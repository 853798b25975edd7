"""Full-run orchestration and artifact persistence.

``run_simulation`` iterates the day loop over the calendar, writes the
line-delimited event log, then derives every report from the log itself via
the replay pipeline.  Deriving reports from the log (rather than from live
state) is what makes ``replay`` able to reproduce them bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

from .. import __version__
from .config import SimConfig, config_to_dict
from .replay import reports_from_events
from .world import build_world, run_day


def write_events(events: list, path: Path) -> None:
    with open(path, "w") as fh:
        for event in events:
            fh.write(json.dumps(event, sort_keys=True) + "\n")


def read_events(path: Path) -> list:
    events = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                events.append(json.loads(line))
    return events


def write_manifest(config: SimConfig, n_events: int, path: Path) -> None:
    cfg = config_to_dict(config)
    canonical = json.dumps(cfg, sort_keys=True).encode()
    manifest = {
        "config": cfg,
        "config_sha256": hashlib.sha256(canonical).hexdigest(),
        "seed": config.seed,
        "version": __version__,
        "n_events": n_events,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_reports(reports: dict, outdir: Path) -> None:
    with open(outdir / "reports.json", "w") as fh:
        json.dump(reports, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(outdir / "sentiment.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "mean_sentiment"])
        writer.writerows(reports["sentiment"])
    with open(outdir / "inequality.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "gini", "top10_share", "bottom50_share"])
        writer.writerows(reports["inequality"])
    with open(outdir / "prices.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "composite", "volume"])
        writer.writerows(zip(reports["days"], reports["composite"],
                             reports["volumes"]))


def run_simulation(config: SimConfig, outdir=None) -> Path:
    """Run the configured simulation and return the run directory."""
    outdir = Path(outdir if outdir is not None else config.paths.output)
    outdir.mkdir(parents=True, exist_ok=True)

    state = build_world(config)
    for _ in range(config.start_day, config.end_day):
        state = run_day(state)

    write_events(state.events, outdir / "events.jsonl")
    write_manifest(config, len(state.events), outdir / "manifest.json")
    reports = reports_from_events(state.events,
                                  reference_path=config.paths.reference)
    write_reports(reports, outdir)
    return outdir
