"""Stage two: deadline-bounded processing of filtered data against a local
store, apportioning overflow work to the co-component, and windowed trend
analytics for the cloud reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence, TypeVar

from .channels import Channel, SensorReading
from .edgefilter import SummaryRecord
from .engine import US_PER_SECOND

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class WorkloadParams:
    """Stage-two knobs: per-pass processing deadline, admission capacity and
    per-item processing cost, all in integer microseconds."""

    analytics_deadline_us: int = 500_000
    buffer_storage: int = 100
    algorithm_time_us: int = 10_000
    co_capacity: int | None = None
    report_interval_us: int = 300_000_000
    retention_window_us: int = 3_600_000_000

    def __post_init__(self) -> None:
        if self.analytics_deadline_us <= 0 or self.algorithm_time_us <= 0:
            raise ValueError("deadline and per-item time must be > 0")
        if self.algorithm_time_us > self.analytics_deadline_us:
            raise ValueError("algorithm_time must not exceed analytics_deadline")
        if self.buffer_storage <= 0:
            raise ValueError("buffer_storage must be > 0")
        if self.co_capacity is not None and self.co_capacity < 0:
            raise ValueError("co_capacity must be >= 0 when set")
        if self.report_interval_us <= 0 or self.retention_window_us <= 0:
            raise ValueError("report_interval and retention_window must be > 0")


@dataclass(slots=True)
class ProcessOutcome:
    processed: list
    forwarded: list
    elapsed_us: int


def process_buffer(
    incoming: Sequence[T],
    params: WorkloadParams,
    store: "LocalStore | None",
    now_us: int,
) -> ProcessOutcome:
    """Process an admitted batch in order, one algorithm-time charge per item.

    An item starts only while cumulative elapsed time is still below the
    deadline; the item in flight when the deadline is reached completes, and
    every remaining item is forwarded to the co-component untouched.
    """
    if len(incoming) > params.buffer_storage:
        raise ValueError(
            f"batch of {len(incoming)} exceeds admission capacity {params.buffer_storage}"
        )
    processed: list[T] = []
    elapsed = 0
    for item in incoming:
        if elapsed >= params.analytics_deadline_us:
            break
        processed.append(item)
        elapsed += params.algorithm_time_us
    forwarded = list(incoming[len(processed):])
    if store is not None:
        for item in processed:
            store.add(item, now_us)
    return ProcessOutcome(processed=processed, forwarded=forwarded, elapsed_us=elapsed)


@dataclass(slots=True)
class LocalStore:
    """Per-channel, time-ordered history of readings and summaries, trimmed to
    a retention window."""

    retention_window_us: int
    readings: dict[Channel, list[tuple[int, float]]] = field(default_factory=dict)
    summaries: dict[Channel, list[SummaryRecord]] = field(default_factory=dict)

    def add(self, item: SensorReading | SummaryRecord, now_us: int) -> None:
        if isinstance(item, SummaryRecord):
            self.summaries.setdefault(item.channel, []).append(item)
        else:
            self.readings.setdefault(item.channel, []).append((item.t_us, item.value))
        self.trim(now_us)

    def extend_readings(self, items: Sequence[SensorReading], now_us: int) -> None:
        for item in items:
            self.readings.setdefault(item.channel, []).append((item.t_us, item.value))
        self.trim(now_us)

    def trim(self, now_us: int) -> None:
        cutoff = now_us - self.retention_window_us
        if cutoff <= 0:
            return
        for channel, entries in self.readings.items():
            keep = 0
            while keep < len(entries) and entries[keep][0] < cutoff:
                keep += 1
            if keep:
                del entries[:keep]
        for channel, recs in self.summaries.items():
            keep = 0
            while keep < len(recs) and recs[keep].window_end_us < cutoff:
                keep += 1
            if keep:
                del recs[:keep]

    def readings_in_window(self, channel: Channel, start_us: int, end_us: int) -> list[tuple[int, float]]:
        return [e for e in self.readings.get(channel, []) if start_us <= e[0] <= end_us]


@dataclass(frozen=True, slots=True)
class AnalyticsReport:
    """Windowed per-channel trend slopes (units per second) with exceedance
    flags, shipped to the cloud on the constrained link."""

    window_start_us: int
    window_end_us: int
    slopes: tuple[tuple[Channel, float], ...]
    flags: tuple[Channel, ...]
    payload_bytes: int

    def trace_detail(self) -> str:
        slopes = ",".join(f"{ch.value}:{slope!r}" for ch, slope in self.slopes)
        flags = ",".join(ch.value for ch in self.flags)
        return (
            f"window={self.window_start_us}..{self.window_end_us} "
            f"slopes=[{slopes}] flags=[{flags}] bytes={self.payload_bytes}"
        )


def least_squares_slope(points: Sequence[tuple[int, float]]) -> float | None:
    """Slope in value-units per second over (t_us, value) points; None when
    degenerate (fewer than 2 points, or no time spread)."""
    if len(points) < 2:
        return None
    ts = [t / US_PER_SECOND for t, _ in points]
    vs = [v for _, v in points]
    t_mean = sum(ts) / len(ts)
    v_mean = sum(vs) / len(vs)
    denom = sum((t - t_mean) ** 2 for t in ts)
    if denom == 0.0:
        return None
    return sum((t - t_mean) * (v - v_mean) for t, v in zip(ts, vs)) / denom


def run_analytics(
    store: LocalStore,
    window_us: int,
    thresholds: Mapping[Channel, float | None],
    now_us: int,
    payload_bytes: int = 64,
) -> AnalyticsReport:
    """Least-squares trend slope per channel over the trailing window; a
    channel is flagged when |slope| exceeds its configured limit. Channels with
    fewer than two points are omitted."""
    if window_us <= 0:
        raise ValueError("window must be > 0")
    start = max(0, now_us - window_us)
    slopes: list[tuple[Channel, float]] = []
    flags: list[Channel] = []
    for channel in Channel:
        points = store.readings_in_window(channel, start, now_us)
        slope = least_squares_slope(points)
        if slope is None:
            continue
        slopes.append((channel, slope))
        limit = thresholds.get(channel)
        if limit is not None and abs(slope) > limit:
            flags.append(channel)
    return AnalyticsReport(
        window_start_us=start,
        window_end_us=now_us,
        slopes=tuple(slopes),
        flags=tuple(flags),
        payload_bytes=payload_bytes,
    )
