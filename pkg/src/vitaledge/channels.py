"""Sensor channels and the reading record exchanged between pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Channel(str, Enum):
    """Vital-sign and home-environment channels a monitor can carry."""

    BODY_TEMP = "BodyTemp"
    HRM = "HRM"
    BP = "BP"
    BGL = "BGL"
    PED = "PED"
    PIR = "PIR"
    PRESSURE_PAD = "PressurePad"

    def __str__(self) -> str:  # keep trace/config output compact
        return self.value


# Stable ordering used when deriving per-channel RNG streams.
CHANNEL_ORDER = {c: i for i, c in enumerate(Channel)}


@dataclass(frozen=True, slots=True)
class SensorReading:
    """One timestamped sample from one channel.

    `t_us` is simulation time in integer microseconds. `payload_bytes` is the
    on-the-wire size this reading would occupy if transmitted raw.
    """

    t_us: int
    channel: Channel
    value: float
    source_id: str
    payload_bytes: int

    def trace_detail(self) -> str:
        return (
            f"channel={self.channel.value} value={self.value!r} "
            f"source={self.source_id} bytes={self.payload_bytes}"
        )
