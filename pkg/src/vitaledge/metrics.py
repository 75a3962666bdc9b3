"""Comparative run metrics.

Definitions used throughout (also printed on the comparison table header):
data traffic is every byte leaving the home monitor onto any link, counted at
enqueue; bandwidth consumption is bytes actually delivered per link within the
run horizon; compute time is the simulated per-item processing charge at stage
two. Percentages are always derived from final counters, never accumulated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .engine import US_PER_SECOND, EventKind, TraceEntry
from .network import GSM, LORAWAN, LinkModel

MODES = ("baseline", "filtered", "managed")

DEFINITION_LINES = (
    "# data traffic: bytes enqueued onto any link by the home monitor",
    "# bandwidth consumption: bytes delivered per link within the run horizon",
    "# compute time: simulated per-item processing charge at stage two, seconds",
)


class MetricsError(Exception):
    pass


@dataclass(slots=True)
class LinkCounters:
    enqueued_count: int = 0
    enqueued_bytes: int = 0
    delivered_count: int = 0
    delivered_bytes: int = 0
    queue_depth_max: int = 0
    backlog_count: int = 0

    @classmethod
    def from_link(cls, link: LinkModel) -> "LinkCounters":
        return cls(
            enqueued_count=link.enqueued_count,
            enqueued_bytes=link.enqueued_bytes,
            delivered_count=link.delivered_count,
            delivered_bytes=link.delivered_bytes,
            queue_depth_max=link.queue_depth_max,
            backlog_count=link.backlog_count,
        )

    def to_dict(self) -> dict[str, int]:
        return {
            "enqueued_count": self.enqueued_count,
            "enqueued_bytes": self.enqueued_bytes,
            "delivered_count": self.delivered_count,
            "delivered_bytes": self.delivered_bytes,
            "queue_depth_max": self.queue_depth_max,
            "backlog_count": self.backlog_count,
        }


@dataclass(slots=True)
class RunCounters:
    """Counters accumulated by the pipeline entities during one run."""

    links: dict[str, LinkCounters] = field(default_factory=dict)
    readings_ingested: int = 0
    bytes_ingested: int = 0
    buffered: int = 0
    sent_onward: int = 0
    alarmed: int = 0
    alarm_dispatches: int = 0
    flagged_readings: int = 0
    summaries_emitted: int = 0
    readings_absorbed: int = 0
    reports_emitted: int = 0
    passes: int = 0
    items_processed_primary: int = 0
    items_processed_co: int = 0
    primary_compute_us: int = 0
    co_compute_us: int = 0
    monitor_backlog: int = 0

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "readings_ingested", "bytes_ingested", "buffered", "sent_onward",
            "alarmed", "alarm_dispatches", "flagged_readings", "summaries_emitted",
            "readings_absorbed", "reports_emitted", "passes", "items_processed_primary",
            "items_processed_co", "primary_compute_us", "co_compute_us",
            "monitor_backlog",
        )}
        out["links"] = {name: lc.to_dict() for name, lc in sorted(self.links.items())}
        return out


@dataclass(slots=True)
class MetricsReport:
    mode: str
    readings_generated: int
    bytes_generated: int
    bytes_forwarded: int
    traffic_reduction_pct: float
    compute_time_s: float
    bandwidth_consumed_bytes: dict[str, int]
    alarm_count: int
    queue_depth_max: dict[str, int]
    input_hash: str
    flags: tuple[str, ...] = ()

    @property
    def total_bandwidth_bytes(self) -> int:
        return sum(self.bandwidth_consumed_bytes.values())

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "readings_generated": self.readings_generated,
            "bytes_generated": self.bytes_generated,
            "bytes_forwarded": self.bytes_forwarded,
            "traffic_reduction_pct": self.traffic_reduction_pct,
            "compute_time_s": self.compute_time_s,
            "bandwidth_consumed_bytes": dict(sorted(self.bandwidth_consumed_bytes.items())),
            "total_bandwidth_bytes": self.total_bandwidth_bytes,
            "alarm_count": self.alarm_count,
            "queue_depth_max": dict(sorted(self.queue_depth_max.items())),
            "input_hash": self.input_hash,
            "flags": list(self.flags),
        }


def _detail_int(detail: str, key: str) -> int | None:
    prefix = key + "="
    for token in detail.split(" "):
        if token.startswith(prefix):
            return int(token[len(prefix):])
    return None


def compute_metrics(
    trace: Iterable[TraceEntry],
    counters: RunCounters,
    mode: str,
    input_hash: str,
) -> MetricsReport:
    """Derive the report for one completed run from its trace and counters.

    Generation and compute figures come from the trace (so a report can be
    recomputed exactly from a persisted trace file); link-level byte and queue
    figures come from the link counters.
    """
    readings = 0
    bytes_generated = 0
    compute_us = 0
    for entry in trace:
        if entry.kind == EventKind.READING_GENERATED.value:
            readings += 1
            b = _detail_int(entry.detail, "bytes")
            bytes_generated += b if b is not None else 0
        elif entry.kind == EventKind.ANALYTICS_PASS.value:
            for key in ("charge_us", "co_charge_us"):
                charge = _detail_int(entry.detail, key)
                if charge:
                    compute_us += charge

    bytes_forwarded = sum(lc.enqueued_bytes for lc in counters.links.values())
    flags: list[str] = []
    if readings == 0:
        traffic_reduction = 0.0
        flags.append("reduction-undefined")
    elif bytes_forwarded > bytes_generated:
        traffic_reduction = 0.0
        flags.append("forwarded-exceeds-generated")
    else:
        traffic_reduction = 100.0 * (1.0 - bytes_forwarded / bytes_generated)

    return MetricsReport(
        mode=mode,
        readings_generated=readings,
        bytes_generated=bytes_generated,
        bytes_forwarded=bytes_forwarded,
        traffic_reduction_pct=traffic_reduction,
        compute_time_s=compute_us / US_PER_SECOND,
        bandwidth_consumed_bytes={n: lc.delivered_bytes for n, lc in counters.links.items()},
        alarm_count=counters.alarm_dispatches,
        queue_depth_max={n: lc.queue_depth_max for n, lc in counters.links.items()},
        input_hash=input_hash,
        flags=tuple(flags),
    )


def _pct_reduction(reference: float, value: float) -> float:
    if reference == 0:
        return 0.0
    return 100.0 * (1.0 - value / reference)


@dataclass(slots=True)
class ComparisonTable:
    """One metric per row, one mode per column."""

    rows: list[tuple[str, dict[str, float | int]]]

    def render(self) -> str:
        lines = list(DEFINITION_LINES)
        lines.append("metric\t" + "\t".join(MODES))
        for name, per_mode in self.rows:
            cells = []
            for mode in MODES:
                value = per_mode.get(mode, "")
                if isinstance(value, float):
                    cells.append(f"{value:.1f}")
                else:
                    cells.append(str(value))
            lines.append(name + "\t" + "\t".join(cells))
        return "\n".join(lines) + "\n"

    def value(self, metric: str, mode: str) -> float | int:
        for name, per_mode in self.rows:
            if name == metric:
                return per_mode[mode]
        raise KeyError(metric)


def compare_modes(reports: Mapping[str, MetricsReport]) -> ComparisonTable:
    """Relative deltas across the three run modes of one input stream.

    Reports must come from identical inputs; mismatched input hashes make the
    comparison invalid and are fatal.
    """
    missing = [m for m in MODES if m not in reports]
    if missing:
        raise MetricsError(f"missing mode reports: {missing}")
    hashes = {reports[m].input_hash for m in MODES}
    if len(hashes) != 1:
        raise MetricsError("input hashes differ across modes; comparison invalid")

    base = reports["baseline"]
    rows: list[tuple[str, dict[str, float | int]]] = []

    def per_mode(fn) -> dict[str, float | int]:
        return {mode: fn(reports[mode]) for mode in MODES}

    rows.append(("readings_generated", per_mode(lambda r: r.readings_generated)))
    rows.append(("bytes_generated", per_mode(lambda r: r.bytes_generated)))
    rows.append(("bytes_forwarded", per_mode(lambda r: r.bytes_forwarded)))
    rows.append(("traffic_reduction_pct", per_mode(lambda r: r.traffic_reduction_pct)))
    rows.append(("compute_time_s", per_mode(lambda r: r.compute_time_s)))
    rows.append(
        ("compute_time_reduction_pct", per_mode(lambda r: _pct_reduction(base.compute_time_s, r.compute_time_s)))
    )
    for link in (LORAWAN, GSM):
        rows.append(
            (f"bandwidth_{link}_bytes", per_mode(lambda r, l=link: r.bandwidth_consumed_bytes.get(l, 0)))
        )
    rows.append(("bandwidth_total_bytes", per_mode(lambda r: r.total_bandwidth_bytes)))
    rows.append(
        (
            "bandwidth_saving_pct",
            per_mode(lambda r: _pct_reduction(base.total_bandwidth_bytes, r.total_bandwidth_bytes)),
        )
    )
    saving = {m: _pct_reduction(base.total_bandwidth_bytes, reports[m].total_bandwidth_bytes) for m in MODES}
    rows.append(
        (
            "managed_vs_filtered_bandwidth_delta_pct",
            {"baseline": 0.0, "filtered": 0.0, "managed": saving["managed"] - saving["filtered"]},
        )
    )
    rows.append(("alarm_count", per_mode(lambda r: r.alarm_count)))
    rows.append(
        ("queue_depth_max", per_mode(lambda r: max(r.queue_depth_max.values(), default=0)))
    )
    return ComparisonTable(rows=rows)
