"""Scenario assembly: wires sensor streams, the two home-monitor stages and
the links into the event engine and runs one mode end to end.

Mode semantics:
  baseline  - no filtering, no alarms, no reports; every reading is sent raw
              and processed sequentially at stage two.
  filtered  - range filtering, buffering/summaries and alarm detection at the
              edge; stage two processes exceptions sequentially.
  managed   - filtered, plus deadline apportionment of stage-two passes to the
              co-component.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .channels import Channel, SensorReading
from .config import RunConfig
from .edgefilter import AlarmDetector, Disposition, EdgeBuffer, filter_reading, flush_buffer
from .engine import EventKind, Simulator, TraceEntry, trace_hash
from .ingest import RawLabRecord, build_input_streams
from .metrics import LinkCounters, MetricsReport, RunCounters, compute_metrics
from .network import (
    EMERGENCY_SERVICES,
    HEALTH_CLOUD,
    LinkModel,
    MessageKind,
    NetMessage,
    route,
)
from .workload import LocalStore, process_buffer, run_analytics

RUN_MODES = ("baseline", "filtered", "managed")


@dataclass(slots=True)
class FlushTick:
    channel: Channel
    emitted: int = 0

    def trace_detail(self) -> str:
        return f"channel={self.channel.value} emitted={self.emitted}"


@dataclass(slots=True)
class PassWork:
    admitted: int = 0
    processed: int = 0
    forwarded: int = 0
    co_processed: int = 0
    requeued: int = 0
    charge_us: int = 0
    co_charge_us: int = 0

    def trace_detail(self) -> str:
        return (
            f"pass=process admitted={self.admitted} processed={self.processed} "
            f"forwarded={self.forwarded} co_processed={self.co_processed} "
            f"requeued={self.requeued} charge_us={self.charge_us} "
            f"co_charge_us={self.co_charge_us}"
        )


@dataclass(slots=True)
class ReportTick:
    slopes: int = 0
    flagged: int = 0
    bytes: int = 0

    def trace_detail(self) -> str:
        return f"pass=report slopes={self.slopes} flagged={self.flagged} bytes={self.bytes}"


class LinkEntity:
    def __init__(self, link: LinkModel):
        self.link = link

    def handle_event(self, sim: Simulator, event) -> None:
        self.link.mark_delivered(event.payload)


class _Sender:
    """Shared message dispatch: route, account, and schedule the delivery."""

    def __init__(self, links: dict[str, LinkModel]):
        self.links = links

    def send(self, sim: Simulator, msg: NetMessage) -> None:
        link = route(msg, self.links)
        delivery_us = link.transmit(msg, sim.now_us)
        sim.schedule(delivery_us, EventKind.TRANSMIT_COMPLETE, link.name, msg)


class MonitorEntity:
    """Stage two: admission queue, per-pass processing, periodic reports."""

    def __init__(self, config: RunConfig, managed: bool,
                 sender: _Sender, counters: RunCounters):
        self.params = config.workload
        self.managed = managed
        self.sender = sender
        self.counters = counters
        self.report_bytes = config.report_bytes
        self.thresholds = {ch: spec.slope_limit for ch, spec in config.vitals.items()}
        self.store = LocalStore(retention_window_us=config.workload.retention_window_us)
        self.pending: deque[SensorReading] = deque()
        self.busy_until_us = 0
        self._pass_scheduled = False

    def submit(self, sim: Simulator, reading: SensorReading) -> None:
        self.pending.append(reading)
        if not self._pass_scheduled:
            start = max(sim.now_us, self.busy_until_us)
            sim.schedule(start, EventKind.ANALYTICS_PASS, "monitor", PassWork())
            self._pass_scheduled = True

    def handle_event(self, sim: Simulator, event) -> None:
        if isinstance(event.payload, ReportTick):
            self._report_pass(sim, event.payload)
        else:
            self._process_pass(sim, event.payload)

    def _process_pass(self, sim: Simulator, work: PassWork) -> None:
        self._pass_scheduled = False
        if not self.pending:
            return
        admitted: list[SensorReading] = []
        while self.pending and len(admitted) < self.params.buffer_storage:
            admitted.append(self.pending.popleft())
        now = sim.now_us

        if self.managed:
            outcome = process_buffer(admitted, self.params, self.store, now)
            processed, forwarded = outcome.processed, outcome.forwarded
            charge = outcome.elapsed_us
            co_take = len(forwarded) if self.params.co_capacity is None else min(
                len(forwarded), self.params.co_capacity
            )
            co_items = forwarded[:co_take]
            requeued = forwarded[co_take:]
            self.store.extend_readings(co_items, now)
            for item in reversed(requeued):
                self.pending.appendleft(item)
            co_charge = len(co_items) * self.params.algorithm_time_us
        else:
            processed, forwarded = admitted, []
            charge = len(admitted) * self.params.algorithm_time_us
            self.store.extend_readings(processed, now)
            co_items, requeued, co_charge = [], [], 0

        work.admitted = len(admitted)
        work.processed = len(processed)
        work.forwarded = len(forwarded)
        work.co_processed = len(co_items)
        work.requeued = len(requeued)
        work.charge_us = charge
        work.co_charge_us = co_charge

        self.counters.passes += 1
        self.counters.items_processed_primary += len(processed)
        self.counters.items_processed_co += len(co_items)
        self.counters.primary_compute_us += charge
        self.counters.co_compute_us += co_charge

        self.busy_until_us = now + charge
        if self.pending:
            sim.schedule(self.busy_until_us, EventKind.ANALYTICS_PASS, "monitor", PassWork())
            self._pass_scheduled = True

    def _report_pass(self, sim: Simulator, tick: ReportTick) -> None:
        report = run_analytics(
            self.store,
            self.params.report_interval_us,
            self.thresholds,
            sim.now_us,
            payload_bytes=self.report_bytes,
        )
        tick.slopes = len(report.slopes)
        tick.flagged = len(report.flags)
        tick.bytes = report.payload_bytes
        self.counters.reports_emitted += 1
        self.sender.send(
            sim,
            NetMessage(
                kind=MessageKind.ANALYTICS_REPORT,
                payload_bytes=report.payload_bytes,
                created_at_us=sim.now_us,
                destination=HEALTH_CLOUD,
                detail=f"slopes={len(report.slopes)} flags={len(report.flags)}",
            ),
        )


class EdgeEntity:
    """Stage one: alarm detection and per-channel range filtering."""

    def __init__(self, config: RunConfig, filtering: bool, sender: _Sender,
                 monitor: MonitorEntity, counters: RunCounters):
        self.config = config
        self.filtering = filtering
        self.sender = sender
        self.monitor = monitor
        self.counters = counters
        self.detector = AlarmDetector(config.alarms)
        self.buffers = {
            ch: EdgeBuffer(capacity=spec.buffer_capacity) for ch, spec in config.vitals.items()
        }
        self.window_start = {ch: 0 for ch in config.vitals}

    def handle_event(self, sim: Simulator, event) -> None:
        if event.kind is EventKind.FLUSH_TIMER:
            self._flush(sim, event.payload)
        else:
            self._ingest(sim, event.payload)

    def _send_raw(self, sim: Simulator, reading: SensorReading, flagged: bool) -> None:
        detail = f"channel={reading.channel.value} source={reading.source_id}"
        if flagged:
            detail += " flag=invalid"
        self.sender.send(
            sim,
            NetMessage(
                kind=MessageKind.RAW_EXCEPTION,
                payload_bytes=reading.payload_bytes,
                created_at_us=sim.now_us,
                destination=HEALTH_CLOUD,
                detail=detail,
            ),
        )
        self.monitor.submit(sim, reading)

    def _send_summary(self, sim: Simulator, summary) -> None:
        self.counters.summaries_emitted += 1
        self.counters.readings_absorbed += summary.count
        self.monitor.store.add(summary, sim.now_us)
        self.sender.send(
            sim,
            NetMessage(
                kind=MessageKind.SUMMARY,
                payload_bytes=summary.payload_bytes,
                created_at_us=sim.now_us,
                destination=HEALTH_CLOUD,
                detail=f"channel={summary.channel.value} count={summary.count}",
            ),
        )

    def _ingest(self, sim: Simulator, reading: SensorReading) -> None:
        self.counters.readings_ingested += 1
        self.counters.bytes_ingested += reading.payload_bytes

        if not self.filtering:
            self.counters.sent_onward += 1
            self._send_raw(sim, reading, flagged=False)
            return

        fired = self.detector.observe(reading)
        if fired:
            self.counters.alarmed += 1
            for rule in fired:
                self.counters.alarm_dispatches += 1
                self.sender.send(
                    sim,
                    NetMessage(
                        kind=MessageKind.ALARM,
                        payload_bytes=self.config.alarm_bytes,
                        created_at_us=sim.now_us,
                        destination=EMERGENCY_SERVICES,
                        detail=f"rule={rule.identifier} channel={reading.channel.value}",
                    ),
                )
            return

        spec = self.config.vitals[reading.channel]
        result = filter_reading(
            reading,
            spec,
            self.buffers[reading.channel],
            window_start_us=self.window_start[reading.channel],
            summary_payload_bytes=self.config.summary_bytes,
        )
        if result.overflow_summary is not None:
            self.monitor.store.extend_readings(result.overflow_absorbed, sim.now_us)
            self._send_summary(sim, result.overflow_summary)
            self.window_start[reading.channel] = sim.now_us
        if result.disposition is Disposition.BUFFERED:
            self.counters.buffered += 1
        else:
            self.counters.sent_onward += 1
            if result.flagged:
                self.counters.flagged_readings += 1
            self._send_raw(sim, reading, result.flagged)

    def _flush(self, sim: Simulator, tick: FlushTick) -> None:
        channel = tick.channel
        buffer = self.buffers[channel]
        absorbed = tuple(buffer.items)
        summary = flush_buffer(
            buffer,
            sim.now_us,
            self.window_start[channel],
            self.config.summary_bytes,
        )
        self.window_start[channel] = sim.now_us
        if summary is not None:
            tick.emitted = summary.count
            self.monitor.store.extend_readings(absorbed, sim.now_us)
            self._send_summary(sim, summary)


@dataclass(slots=True)
class RunResult:
    mode: str
    trace: list[TraceEntry]
    trace_sha256: str
    counters: RunCounters
    report: MetricsReport
    input_hash: str
    backlog_items: int = 0


def _flush_times(period_us: int, horizon_us: int) -> list[int]:
    times = list(range(period_us, horizon_us + 1, period_us))
    if not times or times[-1] != horizon_us:
        times.append(horizon_us)
    return times


def run_mode(
    config: RunConfig,
    mode: str,
    readings: Sequence[SensorReading],
    input_hash: str,
) -> RunResult:
    """Execute one mode over a prepared input stream."""
    if mode not in RUN_MODES:
        raise ValueError(f"unknown mode {mode!r}")
    filtering = mode != "baseline"
    managed = mode == "managed"

    sim = Simulator(config=config.sim)
    counters = RunCounters()
    links = {
        name: LinkModel(name=name, rate_bps=rate) for name, rate in config.link_rates.items()
    }
    sender = _Sender(links)
    monitor = MonitorEntity(config, managed=managed, sender=sender, counters=counters)
    edge = EdgeEntity(config, filtering=filtering, sender=sender, monitor=monitor,
                      counters=counters)
    sim.add_entity("edge", edge)
    sim.add_entity("monitor", monitor)
    for name, link in links.items():
        sim.add_entity(name, LinkEntity(link))

    # Readings are pre-scheduled first so that equal-time FIFO makes a flush
    # boundary cover readings landing exactly on it.
    for reading in readings:
        sim.schedule(reading.t_us, EventKind.READING_GENERATED, "edge", reading)
    horizon = config.sim.horizon_us
    if filtering:
        for channel, spec in config.vitals.items():
            if not spec.has_band:
                continue
            for t in _flush_times(spec.flush_period_us, horizon):
                sim.schedule(t, EventKind.FLUSH_TIMER, "edge", FlushTick(channel))
        for t in range(config.workload.report_interval_us, horizon + 1,
                       config.workload.report_interval_us):
            sim.schedule(t, EventKind.ANALYTICS_PASS, "monitor", ReportTick())

    trace = sim.run()

    counters.links = {name: LinkCounters.from_link(link) for name, link in links.items()}
    counters.monitor_backlog = len(monitor.pending)
    report = compute_metrics(trace, counters, mode, input_hash)
    return RunResult(
        mode=mode,
        trace=trace,
        trace_sha256=trace_hash(trace),
        counters=counters,
        report=report,
        input_hash=input_hash,
        backlog_items=len(monitor.pending),
    )


def prepare_inputs(
    config: RunConfig, records: Sequence[RawLabRecord] | None
) -> tuple[list[SensorReading], str]:
    return build_input_streams(config.sim, config.mappings, config.vitals, records)


def run_modes(
    config: RunConfig,
    modes: Sequence[str],
    records: Sequence[RawLabRecord] | None,
) -> dict[str, RunResult]:
    """Run the requested modes over one identical input stream."""
    readings, input_hash = prepare_inputs(config, records)
    return {mode: run_mode(config, mode, readings, input_hash) for mode in modes}
