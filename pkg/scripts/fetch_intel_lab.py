#!/usr/bin/env python3
"""Download the full Intel Lab sensor dataset (~150 MB uncompressed).

The repository only ships a 1000-row sample (data/intel_lab_sample.txt); this
script fetches the real thing for full-volume runs. Requires network access.

Usage:
    python scripts/fetch_intel_lab.py [--out data/intel_lab_full.txt]
"""

from __future__ import annotations

import argparse
import gzip
import shutil
import sys
import urllib.request
from pathlib import Path

DATASET_URL = "http://db.csail.mit.edu/labdata/data.txt.gz"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--out", default=str(Path(__file__).resolve().parents[1] / "data" / "intel_lab_full.txt")
    )
    parser.add_argument("--url", default=DATASET_URL)
    args = parser.parse_args()

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    archive = out.with_suffix(out.suffix + ".gz")
    print(f"downloading {args.url} ...")
    try:
        urllib.request.urlretrieve(args.url, archive)
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1
    print(f"decompressing to {out} ...")
    with gzip.open(archive, "rb") as src, open(out, "wb") as dst:
        shutil.copyfileobj(src, dst)
    archive.unlink()
    print(f"done: {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
