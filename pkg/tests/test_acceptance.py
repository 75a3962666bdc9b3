"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line (run with `pytest -s tests/test_acceptance.py` to see them as they go)."""

from __future__ import annotations

import json
import math
import random
import time
from contextlib import contextmanager

import pytest

from vitaledge.channels import Channel, SensorReading
from vitaledge.config import load_config
from vitaledge.edgefilter import (
    AlarmAtom,
    AlarmRule,
    Disposition,
    EdgeBuffer,
    VitalSpec,
    check_alarm,
    filter_reading,
)
from vitaledge.ingest import parse_dataset
from vitaledge.metrics import compare_modes
from vitaledge.network import LORAWAN, LinkModel, MessageKind, NetMessage
from vitaledge.pipeline import prepare_inputs, run_mode, run_modes
from vitaledge.workload import WorkloadParams, process_buffer

from conftest import load_script


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number}: FAIL - {title}", flush=True)
        raise
    print(f"ACCEPTANCE {number}: PASS - {title}", flush=True)


def _reading(value, channel, t_us=0):
    return SensorReading(t_us=t_us, channel=channel, value=value, source_id="s", payload_bytes=16)


def test_criterion_1_default_pass_splits_hundred_items_fifty_fifty():
    with criterion(1, "100-item pass processes exactly 50 items at the 0.5 s deadline"):
        params = WorkloadParams()
        batch = [_reading(36.5, Channel.BODY_TEMP, t_us=i) for i in range(100)]
        outcome = process_buffer(batch, params, None, now_us=0)
        assert len(outcome.processed) == 50
        assert len(outcome.forwarded) == 50
        assert params.analytics_deadline_us // params.algorithm_time_us == 50
        assert outcome.processed + outcome.forwarded == batch


def test_criterion_2_algorithm_semantics_on_boundary_grids(tmp_path):
    with criterion(2, "strict-band buffering and alarm disjunction, exact on boundary grids"):
        # (a) strict band: buffered iff 36 < value < 37
        spec = VitalSpec(channel=Channel.BODY_TEMP, normal_low=36.0, normal_high=37.0)
        grid = [
            35.0,
            math.nextafter(36.0, -math.inf),
            36.0,
            math.nextafter(36.0, math.inf),
            36.5,
            math.nextafter(37.0, -math.inf),
            37.0,
            math.nextafter(37.0, math.inf),
            38.2,
        ]
        for value in grid:
            result = filter_reading(_reading(value, Channel.BODY_TEMP), spec, EdgeBuffer(capacity=10))
            expected = Disposition.BUFFERED if 36.0 < value < 37.0 else Disposition.SENT_ONWARD
            assert result.disposition is expected, value

        # (b) alarm disjunction hrm<40 || bp<90 on a boundary grid, level-exact
        rule = AlarmRule(
            identifier="low-vitals",
            atoms=(AlarmAtom(Channel.HRM, "<", 40.0), AlarmAtom(Channel.BP, "<", 90.0)),
        )
        hrm_grid = [30.0, math.nextafter(40.0, -math.inf), 40.0, math.nextafter(40.0, math.inf), 60.0]
        bp_grid = [80.0, math.nextafter(90.0, -math.inf), 90.0, math.nextafter(90.0, math.inf), 120.0]
        for hrm in hrm_grid:
            for bp in bp_grid:
                triggered = check_alarm({Channel.HRM: hrm, Channel.BP: bp}, [rule])
                assert (triggered == [rule]) == (hrm < 40.0 or bp < 90.0), (hrm, bp)

        # (b, continued) zero-delay GSM dispatch through the full pipeline
        scenario = {
            "mappings": [],
            "vitals": {
                "HRM": {"normal_low": 0.0, "normal_high": 1000.0},
                "BP": {"normal_low": 0.0, "normal_high": 1000.0},
            },
            "alarms": [
                {"id": "low-vitals", "combine": "any",
                 "conditions": [["HRM", "<", 40.0], ["BP", "<", 90.0]]}
            ],
            "sim": {"duration_ticks": 10},
        }
        path = tmp_path / "alarm_grid.json"
        path.write_text(json.dumps(scenario), encoding="utf-8")
        config = load_config(path)
        for hrm in hrm_grid:
            for bp in bp_grid:
                readings = [
                    _reading(hrm, Channel.HRM, t_us=0),
                    _reading(bp, Channel.BP, t_us=1_000_000),
                ]
                result = run_mode(config, "filtered", readings, "grid")
                alarms = [
                    e for e in result.trace
                    if e.kind == "TransmitComplete" and "msg=Alarm" in e.detail
                ]
                if hrm < 40.0 or bp < 90.0:
                    # rule becomes evaluable (and true) exactly when BP arrives
                    assert len(alarms) == 1, (hrm, bp)
                    created = next(
                        int(t.removeprefix("created="))
                        for t in alarms[0].detail.split()
                        if t.startswith("created=")
                    )
                    assert created == 1_000_000
                    assert alarms[0].target == "gsm"
                else:
                    assert alarms == [], (hrm, bp)


def test_criterion_3_oracle_equivalence_on_bundled_excerpt(repo_root):
    with criterion(3, "brute-force replay matches simulator counters byte-for-byte"):
        started = time.monotonic()
        oracle = load_script("oracle_replay")
        config = load_config(repo_root / "configs" / "default.json")
        records = parse_dataset(config.dataset_path).records
        assert len(records) == 1000
        readings, input_hash = prepare_inputs(config, records)

        expected = oracle.replay(config, readings)
        for mode in ("filtered", "managed"):
            result = run_mode(config, mode, readings, input_hash)
            assert result.report.bytes_generated == expected["bytes_generated"]
            assert result.report.bytes_forwarded == expected["bytes_forwarded"]
            assert result.report.alarm_count == expected["alarm_count"]
        elapsed = time.monotonic() - started
        assert elapsed < 10.0, f"oracle equivalence took {elapsed:.1f}s"


def test_criterion_4_directional_reduction_on_volume_replay(repo_root, tmp_path):
    with criterion(4, "volume replay: filtered >= 50% traffic reduction, managed bandwidth "
                      ">= filtered, tuned config lands 68 +/- 10"):
        started = time.monotonic()
        expand = load_script("expand_sample")
        big = tmp_path / "intel_lab_100k.txt"
        expand.expand(repo_root / "data" / "intel_lab_sample.txt", big, 100_000)

        config = load_config(repo_root / "configs" / "default.json", {"dataset.path": str(big)})
        records = parse_dataset(config.dataset_path).records
        results = run_modes(config, ["baseline", "filtered", "managed"], records)
        assert results["filtered"].report.readings_generated >= 100_000
        table = compare_modes({m: r.report for m, r in results.items()})
        assert table.value("traffic_reduction_pct", "filtered") >= 50.0
        assert table.value("bandwidth_saving_pct", "managed") >= table.value(
            "bandwidth_saving_pct", "filtered"
        )

        tuned = load_config(repo_root / "configs" / "tuned.json", {"dataset.path": str(big)})
        tuned_results = run_modes(tuned, ["baseline", "filtered"], records)
        tuned_reduction = tuned_results["filtered"].report.traffic_reduction_pct
        assert abs(tuned_reduction - 68.0) <= 10.0, f"tuned reduction {tuned_reduction:.2f}%"

        elapsed = time.monotonic() - started
        assert elapsed < 120.0, f"volume replay took {elapsed:.1f}s"


def test_criterion_5_link_math_exact():
    with criterion(5, "625 B on idle 50 kbps link takes exactly 0.1 s; FIFO serialization"):
        link = LinkModel(name=LORAWAN, rate_bps=50_000)

        def message():
            return NetMessage(
                kind=MessageKind.SUMMARY, payload_bytes=625, created_at_us=0, destination="HealthCloud"
            )

        first = link.transmit(message(), now_us=0)
        assert first == 100_000
        deliveries = [first] + [link.transmit(message(), now_us=0) for _ in range(9)]
        assert deliveries == [100_000 * (i + 1) for i in range(10)]


def test_criterion_6_trace_hash_determinism(repo_root):
    with criterion(6, "identical config+seed produce identical trace hashes in all modes"):
        config = load_config(repo_root / "configs" / "default.json")
        records = parse_dataset(config.dataset_path).records
        first = run_modes(config, ["baseline", "filtered", "managed"], records)
        second = run_modes(config, ["baseline", "filtered", "managed"], records)
        for mode in ("baseline", "filtered", "managed"):
            assert first[mode].trace_sha256 == second[mode].trace_sha256


def test_criterion_7_conservation_suites():
    with criterion(7, "disposition partition, work conservation, byte accounting "
                      "(1e4 randomized cases each)"):
        # disposition partition
        from vitaledge.edgefilter import AlarmDetector

        rng = random.Random(20260811)
        rule = AlarmRule(
            identifier="low-vitals",
            atoms=(AlarmAtom(Channel.HRM, "<", 40.0), AlarmAtom(Channel.BP, "<", 90.0)),
        )
        specs = {
            Channel.BODY_TEMP: VitalSpec(channel=Channel.BODY_TEMP, normal_low=36.0, normal_high=37.0),
            Channel.HRM: VitalSpec(channel=Channel.HRM, normal_low=50.0, normal_high=100.0),
            Channel.BP: VitalSpec(channel=Channel.BP, normal_low=100.0, normal_high=140.0),
        }
        buffers = {ch: EdgeBuffer(capacity=25) for ch in specs}
        detector = AlarmDetector([rule])
        channels = list(specs)
        counts = dict.fromkeys(Disposition, 0)
        absorbed = 0
        for i in range(10_000):
            ch = channels[rng.randrange(len(channels))]
            value = rng.uniform(10.0, 200.0) if rng.random() > 0.01 else math.nan
            r = _reading(value, ch, t_us=i)
            if detector.observe(r):
                counts[Disposition.ALARM] += 1
                continue
            res = filter_reading(r, specs[ch], buffers[ch])
            counts[res.disposition] += 1
            if res.overflow_summary is not None:
                absorbed += res.overflow_summary.count
        absorbed += sum(len(b.items) for b in buffers.values())
        assert sum(counts.values()) == 10_000
        assert absorbed == counts[Disposition.BUFFERED]

        # work conservation
        for _ in range(10_000):
            n = rng.randrange(0, 121)
            deadline_us = rng.randrange(1, 61) * 10_000
            at_us = min(rng.randrange(1, 60) * 1_000, deadline_us)
            params = WorkloadParams(
                analytics_deadline_us=deadline_us, algorithm_time_us=at_us, buffer_storage=121
            )
            batch = list(range(n))
            outcome = process_buffer(batch, params, None, now_us=0)
            assert len(outcome.processed) + len(outcome.forwarded) == n
            assert outcome.elapsed_us <= deadline_us + at_us

        # byte accounting
        link = LinkModel(name=LORAWAN, rate_bps=50_000)
        in_flight = []
        delivered_bytes = 0
        for i in range(10_000):
            m = NetMessage(
                kind=MessageKind.SUMMARY,
                payload_bytes=rng.randrange(1, 4_000),
                created_at_us=i,
                destination="HealthCloud",
            )
            link.transmit(m, now_us=i)
            in_flight.append(m)
            while in_flight and rng.random() < 0.6:
                head = in_flight.pop(0)
                link.mark_delivered(head)
                delivered_bytes += head.payload_bytes
        for head in in_flight:
            link.mark_delivered(head)
            delivered_bytes += head.payload_bytes
        assert link.delivered_bytes == delivered_bytes == link.enqueued_bytes
