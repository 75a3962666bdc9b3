"""Dataset parsing and reading-stream construction.

Two input paths feed a run: replay of a sensor-lab data file (plain text,
columns ``date time epoch moteid temperature humidity light voltage``) mapped
onto vital channels through an affine transform, and synthesis of vitals the
dataset does not carry (heart rate, blood pressure).
"""

from __future__ import annotations

import datetime as _dt
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .channels import CHANNEL_ORDER, Channel, SensorReading
from .engine import US_PER_SECOND, SimConfig

if TYPE_CHECKING:
    from .edgefilter import VitalSpec


class DataError(Exception):
    """Input data is unreadable or does not look like the expected format."""


SOURCE_FIELDS = ("temperature", "humidity", "light", "voltage")


@dataclass(frozen=True, slots=True)
class RawLabRecord:
    """One row of the lab dataset. Sparse source rows never reach this type;
    they are counted and skipped at parse time."""

    date: _dt.date
    time: _dt.time
    epoch: int
    mote_id: int
    temperature: float
    humidity: float
    light: float
    voltage: float


@dataclass(slots=True)
class ParseResult:
    records: list[RawLabRecord]
    skipped: int
    total: int


def _parse_row(fields: list[str]) -> RawLabRecord:
    if len(fields) != 8:
        raise ValueError(f"expected 8 columns, got {len(fields)}")
    record = RawLabRecord(
        date=_dt.date.fromisoformat(fields[0]),
        time=_dt.time.fromisoformat(fields[1]),
        epoch=int(fields[2]),
        mote_id=int(fields[3]),
        temperature=float(fields[4]),
        humidity=float(fields[5]),
        light=float(fields[6]),
        voltage=float(fields[7]),
    )
    if record.epoch < 0:
        raise ValueError("epoch must be >= 0")
    if record.mote_id < 1:
        raise ValueError("mote_id must be >= 1")
    return record


def parse_dataset(path: str | Path, limit: int | None = None) -> ParseResult:
    """Parse the lab data file in row order.

    Malformed or sparse rows are skipped and counted; blank lines are ignored.
    Fatal cases: unreadable file, or more than half of the consumed rows
    malformed (which signals the wrong file entirely).
    """
    records: list[RawLabRecord] = []
    skipped = 0
    total = 0
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if limit is not None and len(records) >= limit:
                    break
                fields = line.split()
                if not fields:
                    continue
                total += 1
                try:
                    records.append(_parse_row(fields))
                except (ValueError, IndexError):
                    skipped += 1
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc
    if total > 0 and 2 * skipped > total:
        raise DataError(
            f"{skipped} of {total} rows malformed in {path}; "
            "this does not look like a lab sensor data file"
        )
    return ParseResult(records=records, skipped=skipped, total=total)


@dataclass(frozen=True, slots=True)
class ChannelMapping:
    """Maps one dataset column onto a vital channel: value = scale*raw + offset,
    replayed at `replay_rate` readings per simulated second starting at t=0."""

    source_field: str
    target_channel: Channel
    scale: float
    offset: float
    replay_rate: float

    def __post_init__(self) -> None:
        if self.source_field not in SOURCE_FIELDS:
            raise ValueError(f"unknown source_field {self.source_field!r}")
        if self.scale == 0:
            raise ValueError("scale must be nonzero")
        if self.replay_rate <= 0:
            raise ValueError("replay_rate must be > 0")


def map_to_readings(
    records: Sequence[RawLabRecord],
    mapping: ChannelMapping,
    config: SimConfig,
    payload_bytes: int = 16,
) -> list[SensorReading]:
    """Replay dataset records onto a channel, timestamped by replay rate.

    Emission stops at the run horizon; record order is preserved.
    """
    out: list[SensorReading] = []
    horizon = config.horizon_us
    for i, record in enumerate(records):
        t_us = round(i * US_PER_SECOND / mapping.replay_rate)
        if t_us > horizon:
            break
        raw = getattr(record, mapping.source_field)
        out.append(
            SensorReading(
                t_us=t_us,
                channel=mapping.target_channel,
                value=float(mapping.scale * raw + mapping.offset),
                source_id=f"mote-{record.mote_id}",
                payload_bytes=payload_bytes,
            )
        )
    return out


@dataclass(frozen=True, slots=True)
class GeneratorProfile:
    """Synthetic stream shape: in-band jitter around a baseline, with a fixed
    per-reading probability of an out-of-band excursion."""

    mean: float
    jitter: float
    exception_prob: float
    rate: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.exception_prob <= 1.0:
            raise ValueError("exception_prob must be in [0, 1]")
        if self.rate <= 0:
            raise ValueError("rate must be > 0")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")


# Excursions land between 2% and 40% of the band width beyond an edge.
_EXCURSION_MIN_FRAC = 0.02
_EXCURSION_SPAN_FRAC = 0.38


def synthesize_vitals(spec: "VitalSpec", duration_us: int, seed: int) -> list[SensorReading]:
    """Generate a deterministic vital-sign stream for a channel with a
    generator profile. Exception readings fall strictly outside the normal
    band; all others strictly inside."""
    profile = spec.generator
    if profile is None:
        raise ValueError(f"channel {spec.channel} has no generator profile")
    if spec.normal_low is None or spec.normal_high is None:
        raise ValueError(f"channel {spec.channel} needs a normal band to synthesize exceptions")

    n = int(duration_us * profile.rate // US_PER_SECOND) + 1
    while round(n * US_PER_SECOND / profile.rate) <= duration_us:
        n += 1

    rng = np.random.default_rng([seed, CHANNEL_ORDER[spec.channel]])
    u_exc = rng.random(n)
    u_jit = rng.random(n)
    u_side = rng.random(n)
    u_depth = rng.random(n)

    low, high = spec.normal_low, spec.normal_high
    width = high - low
    eps = 1e-6 * width

    out: list[SensorReading] = []
    source = f"synth-{spec.channel.value.lower()}"
    for i in range(n):
        t_us = round(i * US_PER_SECOND / profile.rate)
        if t_us > duration_us:
            break
        if u_exc[i] < profile.exception_prob:
            depth = (_EXCURSION_MIN_FRAC + _EXCURSION_SPAN_FRAC * u_depth[i]) * width
            value = low - depth if u_side[i] < 0.5 else high + depth
        else:
            value = profile.mean + (2.0 * u_jit[i] - 1.0) * profile.jitter
            value = min(max(value, low + eps), high - eps)
        out.append(
            SensorReading(
                t_us=t_us,
                channel=spec.channel,
                value=float(value),
                source_id=source,
                payload_bytes=spec.raw_payload_bytes,
            )
        )
    return out


def merge_streams(streams: Sequence[Sequence[SensorReading]]) -> list[SensorReading]:
    """Deterministic merge of per-channel streams: by time, then stream order,
    then position within the stream."""
    keyed = [
        (r.t_us, stream_idx, i, r)
        for stream_idx, stream in enumerate(streams)
        for i, r in enumerate(stream)
    ]
    keyed.sort(key=lambda item: item[:3])
    return [item[3] for item in keyed]


def stream_hash(readings: Iterable[SensorReading]) -> str:
    digest = hashlib.sha256()
    for r in readings:
        digest.update(
            f"{r.t_us}|{r.channel.value}|{r.value!r}|{r.source_id}|{r.payload_bytes}\n".encode()
        )
    return digest.hexdigest()


def build_input_streams(
    sim: SimConfig,
    mappings: Sequence[ChannelMapping],
    vitals: dict[Channel, "VitalSpec"],
    records: Sequence[RawLabRecord] | None,
) -> tuple[list[SensorReading], str]:
    """Assemble the complete, ordered input for one run and its content hash.

    Mapped dataset streams come first (config order), then synthesized streams
    in vitals order. The same assembly is fed to every mode of a comparison.
    """
    streams: list[list[SensorReading]] = []
    for mapping in mappings:
        if records is None:
            raise DataError("config maps dataset columns but no dataset was provided")
        spec = vitals[mapping.target_channel]
        streams.append(map_to_readings(records, mapping, sim, payload_bytes=spec.raw_payload_bytes))
    for spec in vitals.values():
        if spec.generator is not None:
            streams.append(synthesize_vitals(spec, sim.horizon_us, sim.seed))
    merged = merge_streams(streams)
    return merged, stream_hash(merged)
