#!/usr/bin/env python3
"""Tile the bundled sample into a larger dataset file for volume runs.

Rows are repeated with epochs and timestamps continued past the original
range, preserving the per-row sensor values, so the expanded file has the
same value distribution as the sample. Useful when the full dataset has not
been fetched but a high-volume replay (e.g. 100k rows) is wanted.
"""

from __future__ import annotations

import argparse
import datetime as dt
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def expand(src: Path, dst: Path, rows: int) -> int:
    base = src.read_text(encoding="utf-8").splitlines()
    if not base:
        raise SystemExit(f"{src} is empty")
    parsed = [line.split() for line in base]
    first = dt.datetime.fromisoformat(parsed[0][0] + " " + parsed[0][1])
    last = dt.datetime.fromisoformat(parsed[-1][0] + " " + parsed[-1][1])
    span = (last - first) + dt.timedelta(seconds=31)
    out_lines = []
    i = 0
    while len(out_lines) < rows:
        cycle, idx = divmod(i, len(parsed))
        fields = list(parsed[idx])
        stamp = dt.datetime.fromisoformat(fields[0] + " " + fields[1]) + cycle * span
        fields[0] = stamp.date().isoformat()
        fields[1] = stamp.time().isoformat()
        fields[2] = str(i + 1)  # epoch keeps counting
        out_lines.append(" ".join(fields))
        i += 1
    dst.write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    return len(out_lines)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--src", default=str(ROOT / "data" / "intel_lab_sample.txt"))
    parser.add_argument("--out", default=str(ROOT / "data" / "intel_lab_100k.txt"))
    parser.add_argument("--rows", type=int, default=100_000)
    args = parser.parse_args()
    n = expand(Path(args.src), Path(args.out), args.rows)
    print(f"wrote {n} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
