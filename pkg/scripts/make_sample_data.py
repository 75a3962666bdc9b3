#!/usr/bin/env python3
"""Generate the bundled 1000-row sample in the Intel Lab data format.

The real dataset (http://db.csail.mit.edu/labdata/labdata.html) is ~150 MB
and is fetched separately by scripts/fetch_intel_lab.py; the repository ships
this small deterministic stand-in with the same column layout and realistic
value ranges (indoor diurnal temperature cycle, occasional sensor-fault
spikes, slowly decaying battery voltage) so tests run offline.

Columns: date time epoch moteid temperature humidity light voltage
"""

from __future__ import annotations

import argparse
import datetime as dt
import math
from pathlib import Path

import numpy as np

START = dt.datetime(2004, 2, 28, 0, 58, 46, 2785)
ROW_SPACING_S = 31.0
MOTES = (1, 2, 3, 4, 5)
FAULT_TEMP = 122.153  # saturated ADC reading seen on failing motes


def generate(rows: int, seed: int) -> list[str]:
    rng = np.random.default_rng(seed)
    lines = []
    for i in range(rows):
        stamp = START + dt.timedelta(seconds=i * ROW_SPACING_S + float(rng.uniform(0, 0.9)))
        epoch = i + 1
        mote = MOTES[i % len(MOTES)]
        # diurnal cycle around 19-23 C with mote-specific offset and noise
        hours = (stamp - START).total_seconds() / 3600.0
        temp = (
            21.0
            + 2.2 * math.sin(2 * math.pi * hours / 24.0 - 1.2)
            + 0.35 * mote
            + float(rng.normal(0.0, 0.6))
        )
        if rng.random() < 0.012:
            temp = FAULT_TEMP
        humidity = 38.0 + 4.0 * math.sin(2 * math.pi * hours / 24.0 + 0.8) + float(rng.normal(0, 1.2))
        daylight = max(0.0, math.sin(2 * math.pi * (hours - 6.0) / 24.0))
        light = round(6.0 + 480.0 * daylight + float(rng.normal(0, 12.0)), 2)
        light = max(light, 0.45)
        voltage = 2.68 - 0.00002 * i + float(rng.normal(0, 0.003))
        lines.append(
            f"{stamp.date().isoformat()} {stamp.time().isoformat()} {epoch} {mote} "
            f"{temp:.4f} {humidity:.4f} {light} {voltage:.5f}"
        )
    return lines


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument(
        "--out", default=str(Path(__file__).resolve().parents[1] / "data" / "intel_lab_sample.txt")
    )
    args = parser.parse_args()
    lines = generate(args.rows, args.seed)
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
