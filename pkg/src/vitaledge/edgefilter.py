"""Stage one, at the network edge: per-channel range filtering with buffering,
and alarm-condition detection over the latest-value vector.

A reading strictly inside its channel's normal band is buffered locally and
later absorbed into a summary; anything else is an exception and leaves the
edge immediately. Alarm rules (e.g. heart rate below 40 or blood pressure
below 90) dispatch on a side channel the moment they become true.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .channels import Channel, SensorReading

if TYPE_CHECKING:
    from .ingest import GeneratorProfile


@dataclass(frozen=True, slots=True)
class VitalSpec:
    """Per-channel configuration: normal band (strict inequalities), raw
    payload size, flush period and buffer capacity, plus optional synthesis
    profile and trend-slope limit."""

    channel: Channel
    normal_low: float | None = None
    normal_high: float | None = None
    raw_payload_bytes: int = 16
    flush_period_us: int = 60_000_000
    buffer_capacity: int = 100
    slope_limit: float | None = None
    generator: "GeneratorProfile | None" = None

    def __post_init__(self) -> None:
        if (self.normal_low is None) != (self.normal_high is None):
            raise ValueError(f"{self.channel}: normal band needs both bounds or neither")
        if self.normal_low is not None and not self.normal_low < self.normal_high:
            raise ValueError(f"{self.channel}: normal_low must be < normal_high")
        if self.raw_payload_bytes <= 0:
            raise ValueError(f"{self.channel}: raw_payload_bytes must be > 0")
        if self.flush_period_us <= 0:
            raise ValueError(f"{self.channel}: flush_period must be > 0")
        if self.buffer_capacity <= 0:
            raise ValueError(f"{self.channel}: buffer_capacity must be > 0")

    @property
    def has_band(self) -> bool:
        return self.normal_low is not None


class Disposition(Enum):
    BUFFERED = "Buffered"
    SENT_ONWARD = "SentOnward"
    ALARM = "AlarmDispatched"


@dataclass(slots=True)
class EdgeBuffer:
    capacity: int
    items: list[SensorReading] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True, slots=True)
class SummaryRecord:
    """Fixed-size aggregate emitted when an edge buffer flushes."""

    channel: Channel
    window_start_us: int
    window_end_us: int
    count: int
    mean: float
    minimum: float
    maximum: float
    payload_bytes: int

    def trace_detail(self) -> str:
        return (
            f"channel={self.channel.value} count={self.count} mean={self.mean!r} "
            f"min={self.minimum!r} max={self.maximum!r} "
            f"window={self.window_start_us}..{self.window_end_us} bytes={self.payload_bytes}"
        )


@dataclass(slots=True)
class FilterResult:
    disposition: Disposition
    flagged: bool = False
    overflow_summary: SummaryRecord | None = None
    overflow_absorbed: tuple[SensorReading, ...] = ()


def flush_buffer(
    buffer: EdgeBuffer,
    now_us: int,
    window_start_us: int,
    payload_bytes: int,
) -> SummaryRecord | None:
    """Summarize and empty the buffer. An empty buffer emits nothing."""
    if not buffer.items:
        return None
    values = [r.value for r in buffer.items]
    summary = SummaryRecord(
        channel=buffer.items[0].channel,
        window_start_us=window_start_us,
        window_end_us=now_us,
        count=len(values),
        mean=sum(values) / len(values),
        minimum=min(values),
        maximum=max(values),
        payload_bytes=payload_bytes,
    )
    buffer.items.clear()
    return summary


def filter_reading(
    reading: SensorReading,
    spec: VitalSpec,
    buffer: EdgeBuffer,
    window_start_us: int = 0,
    summary_payload_bytes: int = 32,
) -> FilterResult:
    """Range filtering for one reading.

    Strictly in-band readings are buffered (a full buffer flushes first);
    everything else, including NaN sensor faults and channels without a
    configured band, is sent onward.
    """
    if reading.channel != spec.channel:
        raise ValueError(f"reading channel {reading.channel} does not match spec {spec.channel}")
    if math.isnan(reading.value):
        return FilterResult(Disposition.SENT_ONWARD, flagged=True)
    if not spec.has_band or not spec.normal_low < reading.value < spec.normal_high:
        return FilterResult(Disposition.SENT_ONWARD)

    overflow = None
    absorbed: tuple[SensorReading, ...] = ()
    if len(buffer) >= spec.buffer_capacity:
        absorbed = tuple(buffer.items)
        overflow = flush_buffer(buffer, reading.t_us, window_start_us, summary_payload_bytes)
    buffer.items.append(reading)
    return FilterResult(Disposition.BUFFERED, overflow_summary=overflow, overflow_absorbed=absorbed)


_COMPARATORS = {
    "<": lambda v, t: v < t,
    "<=": lambda v, t: v <= t,
    ">": lambda v, t: v > t,
    ">=": lambda v, t: v >= t,
}


@dataclass(frozen=True, slots=True)
class AlarmAtom:
    channel: Channel
    comparator: str
    threshold: float

    def __post_init__(self) -> None:
        if self.comparator not in _COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")

    def holds(self, value: float) -> bool:
        return _COMPARATORS[self.comparator](value, self.threshold)


@dataclass(frozen=True, slots=True)
class AlarmRule:
    """Disjunction ("any") or conjunction ("all") over threshold atoms."""

    identifier: str
    atoms: tuple[AlarmAtom, ...]
    combine: str = "any"

    def __post_init__(self) -> None:
        if self.combine not in ("any", "all"):
            raise ValueError("combine must be 'any' or 'all'")
        if not self.atoms:
            raise ValueError(f"rule {self.identifier!r} has no atoms")

    @property
    def channels(self) -> frozenset[Channel]:
        return frozenset(atom.channel for atom in self.atoms)

    def evaluate(self, latest: Mapping[Channel, float]) -> bool:
        """True when the predicate holds. A rule whose referenced channels are
        not all present is not evaluable and never triggers."""
        if any(ch not in latest for ch in self.channels):
            return False
        results = (atom.holds(latest[atom.channel]) for atom in self.atoms)
        return any(results) if self.combine == "any" else all(results)


def check_alarm(
    latest: Mapping[Channel, float],
    rules: Iterable[AlarmRule],
) -> list[AlarmRule]:
    """Rules whose predicates hold on the latest-value vector."""
    return [rule for rule in rules if rule.evaluate(latest)]


class AlarmDetector:
    """Edge-triggered wrapper over the level predicate: a rule fires when a
    reading makes it transition from not-triggered to triggered, so a
    persisting condition raises one alarm, not one per reading."""

    def __init__(self, rules: Sequence[AlarmRule]):
        self.rules = tuple(rules)
        self.latest: dict[Channel, float] = {}
        self._active: dict[str, bool] = {rule.identifier: False for rule in self.rules}

    def observe(self, reading: SensorReading) -> list[AlarmRule]:
        """Update the latest-value vector with this reading and return rules
        that just became true."""
        self.latest[reading.channel] = reading.value
        fired: list[AlarmRule] = []
        for rule in self.rules:
            now_true = rule.evaluate(self.latest)
            if now_true and not self._active[rule.identifier]:
                fired.append(rule)
            self._active[rule.identifier] = now_true
        return fired
