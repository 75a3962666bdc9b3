"""Deterministic discrete-event engine: clock, event queue, entity dispatch.

Time is kept as integer microseconds to make event ordering immune to
floating-point drift; "ticks" are a reporting unit (one simulated second by
default). Events with equal timestamps are delivered in scheduling order.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Protocol

US_PER_SECOND = 1_000_000


def us_from_seconds(seconds: float) -> int:
    return round(seconds * US_PER_SECOND)


def seconds_from_us(us: int) -> float:
    return us / US_PER_SECOND


class EventKind(Enum):
    READING_GENERATED = "ReadingGenerated"
    FLUSH_TIMER = "FlushTimer"
    TRANSMIT_COMPLETE = "TransmitComplete"
    ANALYTICS_PASS = "AnalyticsPass"


class SimError(Exception):
    """Base class for simulation errors."""


class SchedulingError(SimError):
    """Raised when an event is scheduled in the past."""


class SimulationFault(SimError):
    """An entity raised during event handling; carries the offending event."""

    def __init__(self, event: "SimEvent", cause: BaseException):
        super().__init__(f"entity {event.target!r} failed on {event}: {cause!r}")
        self.event = event
        self.cause = cause


@dataclass(slots=True)
class SimConfig:
    """Run horizon and reproducibility knobs."""

    duration_ticks: int
    seed: int = 42
    tick_seconds: float = 1.0

    def __post_init__(self) -> None:
        if self.duration_ticks <= 0:
            raise ValueError("duration_ticks must be > 0")
        if self.tick_seconds <= 0:
            raise ValueError("tick_seconds must be > 0")

    @property
    def tick_us(self) -> int:
        return us_from_seconds(self.tick_seconds)

    @property
    def horizon_us(self) -> int:
        return self.duration_ticks * self.tick_us


@dataclass(slots=True)
class SimEvent:
    time_us: int
    seq: int
    kind: EventKind
    target: str
    payload: Any = None

    def __str__(self) -> str:
        return f"event(t={self.time_us}us seq={self.seq} {self.kind.value} -> {self.target})"


class EventHandle:
    """Permits cancellation of a scheduled event before delivery."""

    __slots__ = ("event", "cancelled", "delivered")

    def __init__(self, event: SimEvent):
        self.event = event
        self.cancelled = False
        self.delivered = False

    def cancel(self) -> bool:
        """Cancel if not yet delivered. Returns True when the cancel took effect."""
        if self.delivered or self.cancelled:
            return False
        self.cancelled = True
        return True


class Entity(Protocol):
    def handle_event(self, sim: "Simulator", event: SimEvent) -> None: ...


@dataclass(frozen=True, slots=True)
class TraceEntry:
    time_us: int
    seq: int
    kind: str
    target: str
    detail: str

    def line(self) -> str:
        return f"t_us={self.time_us}\tseq={self.seq}\tkind={self.kind}\ttarget={self.target}\t{self.detail}"


def parse_trace_line(line: str) -> TraceEntry:
    t_field, seq_field, kind_field, target_field, detail = line.rstrip("\n").split("\t", 4)
    return TraceEntry(
        time_us=int(t_field.removeprefix("t_us=")),
        seq=int(seq_field.removeprefix("seq=")),
        kind=kind_field.removeprefix("kind="),
        target=target_field.removeprefix("target="),
        detail=detail,
    )


def trace_hash(entries: Iterable[TraceEntry]) -> str:
    digest = hashlib.sha256()
    for entry in entries:
        digest.update(entry.line().encode())
        digest.update(b"\n")
    return digest.hexdigest()


def _payload_detail(payload: Any) -> str:
    if payload is None:
        return ""
    describe = getattr(payload, "trace_detail", None)
    if describe is not None:
        return describe()
    return repr(payload)


@dataclass
class Simulator:
    """Single-threaded event loop over registered entities.

    The trace entry for an event is rendered after its handler runs, so
    handler-filled payload fields (pass outcomes, delivery bookkeeping) are
    visible in the trace.
    """

    config: SimConfig
    now_us: int = 0
    entities: dict[str, Entity] = field(default_factory=dict)
    trace: list[TraceEntry] = field(default_factory=list)
    _heap: list[tuple[int, int, EventHandle]] = field(default_factory=list)
    _next_seq: int = 0

    def add_entity(self, name: str, entity: Entity) -> None:
        if name in self.entities:
            raise ValueError(f"entity {name!r} already registered")
        self.entities[name] = entity

    def schedule(self, time_us: int, kind: EventKind, target: str, payload: Any = None) -> EventHandle:
        if time_us < self.now_us:
            raise SchedulingError(f"cannot schedule at t={time_us}us, clock is {self.now_us}us")
        event = SimEvent(time_us=time_us, seq=self._next_seq, kind=kind, target=target, payload=payload)
        self._next_seq += 1
        handle = EventHandle(event)
        heapq.heappush(self._heap, (time_us, event.seq, handle))
        return handle

    def schedule_in(self, delay_us: int, kind: EventKind, target: str, payload: Any = None) -> EventHandle:
        return self.schedule(self.now_us + delay_us, kind, target, payload)

    def run(self) -> list[TraceEntry]:
        """Deliver events in (time, seq) order until the queue drains or the
        horizon passes. Returns the completed trace."""
        horizon = self.config.horizon_us
        while self._heap:
            time_us, _, handle = heapq.heappop(self._heap)
            if handle.cancelled:
                continue
            if time_us > horizon:
                break
            event = handle.event
            self.now_us = time_us
            entity = self.entities.get(event.target)
            if entity is None:
                raise SimulationFault(event, KeyError(f"no entity {event.target!r}"))
            try:
                entity.handle_event(self, event)
            except SimulationFault:
                raise
            except Exception as exc:
                raise SimulationFault(event, exc) from exc
            handle.delivered = True
            self.trace.append(
                TraceEntry(
                    time_us=event.time_us,
                    seq=event.seq,
                    kind=event.kind.value,
                    target=event.target,
                    detail=_payload_detail(event.payload),
                )
            )
        return self.trace
