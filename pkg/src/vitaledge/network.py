"""Fluid models of the constrained community-gateway link and the alarm side
channel: FIFO serialization at a fixed bit rate, no loss, infinite queues.
Queue depth is itself a reported metric rather than a drop trigger."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .engine import US_PER_SECOND

LORAWAN = "lorawan"
GSM = "gsm"

HEALTH_CLOUD = "HealthCloud"
EMERGENCY_SERVICES = "EmergencyServices"


class MessageKind(Enum):
    RAW_EXCEPTION = "RawException"
    SUMMARY = "Summary"
    ANALYTICS_REPORT = "AnalyticsReport"
    ALARM = "Alarm"


@dataclass(slots=True)
class NetMessage:
    kind: MessageKind
    payload_bytes: int
    created_at_us: int
    destination: str
    detail: str = ""
    sent_at_us: int | None = None
    delivered_at_us: int | None = None

    def __post_init__(self) -> None:
        if self.payload_bytes <= 0:
            raise ValueError("payload_bytes must be > 0")

    def trace_detail(self) -> str:
        return (
            f"msg={self.kind.value} bytes={self.payload_bytes} dest={self.destination} "
            f"created={self.created_at_us} sent={self.sent_at_us} "
            f"delivered={self.delivered_at_us} {self.detail}".rstrip()
        )


def airtime_us(payload_bytes: int, rate_bps: int) -> int:
    """Transmission time for a payload at a link rate, rounded up to a whole
    microsecond (a payload never ships faster than the rate allows)."""
    return -(-payload_bytes * 8 * US_PER_SECOND // rate_bps)


@dataclass(slots=True)
class LinkModel:
    """One rate-capped FIFO link. At most one message is in flight at a time;
    the rest wait in an unbounded queue."""

    name: str
    rate_bps: int
    busy_until_us: int = 0
    queue: deque[NetMessage] = field(default_factory=deque)
    enqueued_count: int = 0
    enqueued_bytes: int = 0
    delivered_count: int = 0
    delivered_bytes: int = 0
    queue_depth_max: int = 0

    def __post_init__(self) -> None:
        if self.rate_bps <= 0:
            raise ValueError("rate_bps must be > 0")

    def transmit(self, msg: NetMessage, now_us: int) -> int:
        """Enqueue a message; returns its delivery time. Transmission starts
        when the link frees up and lasts payload_bytes*8/rate seconds."""
        start = max(now_us, self.busy_until_us)
        msg.sent_at_us = start
        msg.delivered_at_us = start + airtime_us(msg.payload_bytes, self.rate_bps)
        self.busy_until_us = msg.delivered_at_us
        self.queue.append(msg)
        self.enqueued_count += 1
        self.enqueued_bytes += msg.payload_bytes
        self.queue_depth_max = max(self.queue_depth_max, len(self.queue))
        return msg.delivered_at_us

    def mark_delivered(self, msg: NetMessage) -> None:
        head = self.queue.popleft()
        if head is not msg:
            raise RuntimeError(f"{self.name}: out-of-order delivery")
        self.delivered_count += 1
        self.delivered_bytes += msg.payload_bytes

    @property
    def backlog_count(self) -> int:
        return len(self.queue)


def route(msg: NetMessage, links: dict[str, LinkModel]) -> LinkModel:
    """Alarms go out the GSM side channel; everything else takes the
    community gateway link."""
    return links[GSM] if msg.kind is MessageKind.ALARM else links[LORAWAN]
