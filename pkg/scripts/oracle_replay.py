#!/usr/bin/env python3
"""Brute-force replay of the edge pipeline's byte accounting.

This is a deliberately flat, independent reimplementation of the filtering
rules and byte accounting used to cross-check the event-driven simulator: it
shares only input acquisition (dataset parsing, stream synthesis, config
structures) with the package and re-derives dispositions, buffer/flush
behaviour, alarm edge-triggering and all byte counters in one straight loop,
with no event queue, no entities and no link model.

Usage:
    python scripts/oracle_replay.py --config configs/default.json \
        --dataset data/intel_lab_sample.txt
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vitaledge.config import RunConfig, load_config  # noqa: E402
from vitaledge.ingest import build_input_streams, parse_dataset  # noqa: E402

_OPS = {
    "<": lambda v, t: v < t,
    "<=": lambda v, t: v <= t,
    ">": lambda v, t: v > t,
    ">=": lambda v, t: v >= t,
}


def _rule_holds(rule, latest) -> bool:
    for atom in rule.atoms:
        if atom.channel not in latest:
            return False
    results = [_OPS[atom.comparator](latest[atom.channel], atom.threshold) for atom in rule.atoms]
    return any(results) if rule.combine == "any" else all(results)


def replay(config: RunConfig, readings) -> dict:
    """Filtered-mode counters computed by straight-line replay."""
    horizon = config.sim.horizon_us

    # periodic flush boundaries per banded channel, final boundary at horizon
    boundaries: dict = {}
    cursor: dict = {}
    buf_count: dict = {}
    for channel, spec in config.vitals.items():
        if spec.normal_low is None:
            continue
        times = list(range(spec.flush_period_us, horizon + 1, spec.flush_period_us))
        if not times or times[-1] != horizon:
            times.append(horizon)
        boundaries[channel] = times
        cursor[channel] = 0
        buf_count[channel] = 0

    latest: dict = {}
    active = {rule.identifier: False for rule in config.alarms}

    readings_generated = 0
    bytes_generated = 0
    exception_bytes = 0
    exceptions = 0
    summaries = 0
    alarms = 0

    def fire_boundaries_before(t_us: int) -> None:
        nonlocal summaries
        for channel, times in boundaries.items():
            i = cursor[channel]
            while i < len(times) and times[i] < t_us:
                if buf_count[channel] > 0:
                    summaries += 1
                    buf_count[channel] = 0
                i += 1
            cursor[channel] = i

    for r in readings:
        fire_boundaries_before(r.t_us)
        readings_generated += 1
        bytes_generated += r.payload_bytes

        latest[r.channel] = r.value
        fired = 0
        for rule in config.alarms:
            holds = _rule_holds(rule, latest)
            if holds and not active[rule.identifier]:
                fired += 1
            active[rule.identifier] = holds
        if fired:
            alarms += fired
            continue

        spec = config.vitals[r.channel]
        in_band = (
            spec.normal_low is not None
            and not math.isnan(r.value)
            and spec.normal_low < r.value < spec.normal_high
        )
        if not in_band:
            exceptions += 1
            exception_bytes += r.payload_bytes
            continue
        if buf_count[r.channel] == spec.buffer_capacity:
            summaries += 1
            buf_count[r.channel] = 1
        else:
            buf_count[r.channel] += 1

    fire_boundaries_before(horizon + 1)

    reports = horizon // config.workload.report_interval_us
    bytes_forwarded = (
        exception_bytes
        + summaries * config.summary_bytes
        + alarms * config.alarm_bytes
        + reports * config.report_bytes
    )
    return {
        "readings_generated": readings_generated,
        "bytes_generated": bytes_generated,
        "bytes_forwarded": bytes_forwarded,
        "alarm_count": alarms,
        "exceptions": exceptions,
        "summaries": summaries,
        "reports": reports,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="run configuration JSON")
    parser.add_argument("--dataset", default=None, help="lab dataset file")
    args = parser.parse_args(argv)

    config = load_config(args.config)
    records = None
    dataset = args.dataset or config.dataset_path
    if config.mappings:
        if dataset is None:
            print("a dataset is required by the configured mappings", file=sys.stderr)
            return 2
        records = parse_dataset(dataset, config.dataset_limit).records
    readings, input_hash = build_input_streams(config.sim, config.mappings, config.vitals, records)
    counters = replay(config, readings)
    counters["input_hash"] = input_hash
    print(json.dumps(counters, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
