"""Dual-route checks: the straight-line replay oracle and the event-driven
simulator must agree on byte accounting under varied configurations, not just
the shipped defaults."""

from __future__ import annotations

import json
import math
import random

import pytest

from vitaledge.channels import Channel, SensorReading
from vitaledge.config import load_config
from vitaledge.ingest import parse_dataset, stream_hash
from vitaledge.pipeline import prepare_inputs, run_mode

# (flush_period_s, buffer_capacity, replay_rate, hrm_exception_prob, co_capacity, summary_bytes)
VARIATIONS = [
    (60.0, 100, 100.0, 0.03, None, 32),    # shipped defaults
    (7.0, 3, 17.0, 0.4, 5, 32),            # tiny buffers, frequent flushes
    (93.5, 17, 3.0, 0.0, 0, 24),           # period not dividing the horizon, no co-capacity
    (2000.0, 100, 100.0, 1.0, None, 32),   # single end-of-run flush, all-exception stream
    (13.0, 5, 250.0, 0.25, 1, 32),         # overflow-dominated flushing
    (45.0, 10, 50.0, 0.03, None, 20),      # odd summary size
]


def _config(tmp_path, flush_s, capacity, rate, exc_prob, co_cap, summary_bytes):
    payload = {
        "sim": {"duration_ticks": 400, "seed": 1234},
        "mappings": [
            {
                "source_field": "temperature",
                "target_channel": "BodyTemp",
                "scale": 0.1288,
                "offset": 34.068,
                "replay_rate": rate,
            }
        ],
        "vitals": {
            "BodyTemp": {
                "normal_low": 36.0,
                "normal_high": 37.0,
                "flush_period_s": flush_s,
                "buffer_capacity": capacity,
            },
            "HRM": {
                "normal_low": 50.0,
                "normal_high": 100.0,
                "generator": {"mean": 72.0, "jitter": 6.0, "exception_prob": exc_prob, "rate": 1.0},
            },
            "BP": {
                "normal_low": 100.0,
                "normal_high": 140.0,
                "generator": {"mean": 120.0, "jitter": 8.0, "exception_prob": 0.1, "rate": 1.0},
            },
        },
        "alarms": [
            {"id": "low-vitals", "combine": "any",
             "conditions": [["HRM", "<", 40.0], ["BP", "<", 90.0]]}
        ],
        "workload": {"co_capacity": co_cap, "report_interval_s": 30.0},
        "payloads": {"summary_bytes": summary_bytes, "report_bytes": 64, "alarm_bytes": 16},
    }
    path = tmp_path / "variation.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return load_config(path)


def _assert_match(oracle_replay, config, readings, input_hash):
    expected = oracle_replay.replay(config, readings)
    for mode in ("filtered", "managed"):
        result = run_mode(config, mode, readings, input_hash)
        assert result.report.readings_generated == expected["readings_generated"]
        assert result.report.bytes_generated == expected["bytes_generated"]
        assert result.report.bytes_forwarded == expected["bytes_forwarded"]
        assert result.report.alarm_count == expected["alarm_count"]
        assert result.counters.summaries_emitted == expected["summaries"]


@pytest.mark.parametrize("variation", VARIATIONS, ids=[str(i) for i in range(len(VARIATIONS))])
def test_oracle_matches_simulator_across_configs(
    variation, tmp_path, sample_dataset, oracle_replay
):
    config = _config(tmp_path, *variation)
    records = parse_dataset(sample_dataset).records
    readings, input_hash = prepare_inputs(config, records)
    _assert_match(oracle_replay, config, readings, input_hash)


def test_oracle_matches_simulator_on_nan_and_boundary_stream(tmp_path, oracle_replay):
    rng = random.Random(31)
    readings = []
    for i in range(5000):
        pick = rng.random()
        if pick < 0.45:
            value = rng.choice([35.9, 36.0, 36.2, 36.5, 36.999, 37.0, 38.5, math.nan])
            ch = Channel.BODY_TEMP
        elif pick < 0.75:
            value = rng.choice([35.0, 39.9, 40.0, 55.0, 72.0, 101.0, math.nan])
            ch = Channel.HRM
        else:
            value = rng.choice([85.0, 89.9, 90.0, 120.0, 139.0, 141.0])
            ch = Channel.BP
        readings.append(
            SensorReading(t_us=i * 200_000, channel=ch, value=value, source_id="t", payload_bytes=16)
        )
    payload = {
        "sim": {"duration_ticks": 1000},
        "mappings": [],
        "vitals": {
            "BodyTemp": {"normal_low": 36.0, "normal_high": 37.0,
                          "flush_period_s": 45.0, "buffer_capacity": 10},
            "HRM": {"normal_low": 50.0, "normal_high": 100.0},
            "BP": {"normal_low": 100.0, "normal_high": 140.0},
        },
        "alarms": [
            {"id": "low-vitals", "combine": "any",
             "conditions": [["HRM", "<", 40.0], ["BP", "<", 90.0]]}
        ],
    }
    path = tmp_path / "nan.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    config = load_config(path)
    _assert_match(oracle_replay, config, readings, stream_hash(readings))
    # the stream's NaN faults were escalated, not silently dropped
    result = run_mode(config, "filtered", readings, stream_hash(readings))
    assert result.counters.flagged_readings > 0
