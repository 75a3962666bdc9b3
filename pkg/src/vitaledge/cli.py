"""Command-line entry point: load a configuration, replay the dataset through
the requested mode(s), and persist metrics, comparison table and traces.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal fault.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .ingest import DataError, parse_dataset
from .metrics import compare_modes
from .pipeline import RUN_MODES, RunResult, run_modes

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_FAULT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vitaledge",
        description="Discrete-event simulation of a home health-monitoring edge pipeline.",
    )
    parser.add_argument("--config", default=None, help="run configuration JSON file")
    parser.add_argument("--dataset", default=None, help="lab dataset file (overrides config)")
    parser.add_argument(
        "--mode",
        default=None,
        choices=["baseline", "filtered", "managed", "all"],
        help="run mode (overrides config)",
    )
    parser.add_argument("--duration", type=int, default=None, help="run duration in ticks")
    parser.add_argument("--seed", type=int, default=None, help="random seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument(
        "--emit-trace", action="store_true", default=None, help="write per-event trace files"
    )
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.dataset is not None:
        overrides["dataset.path"] = args.dataset
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.duration is not None:
        overrides["sim.duration_ticks"] = args.duration
    if args.seed is not None:
        overrides["sim.seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.emit_trace:
        overrides["emit_trace"] = True
    return overrides


def _atomic_write(path: Path, content: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _metrics_payload(result: RunResult) -> str:
    payload = {
        "report": result.report.to_dict(),
        "counters": result.counters.to_dict(),
        "trace_sha256": result.trace_sha256,
        "backlog_items": result.backlog_items,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def run_scenario(config: RunConfig) -> int:
    """Execute the configured scenario and write all artifacts at the end, so
    an aborted run leaves no partial report files."""
    records = None
    if config.mappings:
        if config.dataset_path is None:
            raise DataError("the configured mappings replay a dataset; pass --dataset or set dataset.path")
        result = parse_dataset(config.dataset_path, config.dataset_limit)
        records = result.records
        if result.skipped:
            print(f"dataset: parsed {len(records)} rows, skipped {result.skipped}", file=sys.stderr)

    modes = list(RUN_MODES) if config.mode == "all" else [config.mode]
    results = run_modes(config, modes, records)

    outputs: dict[Path, str] = {}
    out_dir = Path(config.output_dir)
    for mode, result in results.items():
        outputs[out_dir / f"metrics_{mode}.json"] = _metrics_payload(result)
        if config.emit_trace:
            trace_text = "".join(entry.line() + "\n" for entry in result.trace)
            outputs[out_dir / f"trace_{mode}.log"] = trace_text
    if config.mode == "all":
        table = compare_modes({mode: r.report for mode, r in results.items()})
        outputs[out_dir / "comparison.tsv"] = table.render()

    out_dir.mkdir(parents=True, exist_ok=True)
    for path, content in outputs.items():
        _atomic_write(path, content)

    for mode, result in results.items():
        r = result.report
        print(
            f"{mode}: readings={r.readings_generated} forwarded={r.bytes_forwarded}B "
            f"traffic_reduction={r.traffic_reduction_pct:.1f}% compute={r.compute_time_s:.2f}s "
            f"alarms={r.alarm_count}"
        )
    print(f"wrote {len(outputs)} file(s) to {out_dir}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_scenario(config)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # fault boundary: anything else is an internal error
        print(f"internal fault: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    raise SystemExit(main())
