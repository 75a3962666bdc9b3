"""Run configuration: JSON file loading, defaulting, validation.

The scenario sections (`mappings`, `vitals`, `alarms`) replace the built-in
defaults wholesale when present; scalar sections (`sim`, `workload`, `links`,
`payloads`, `dataset`) merge field by field. Unknown keys are fatal, with the
offending dotted path named.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .channels import Channel
from .edgefilter import AlarmAtom, AlarmRule, VitalSpec
from .engine import SimConfig, us_from_seconds
from .ingest import ChannelMapping, GeneratorProfile
from .network import GSM, LORAWAN
from .workload import WorkloadParams


class ConfigError(Exception):
    pass


MODES = ("baseline", "filtered", "managed", "all")

DEFAULT_CONFIG: dict[str, Any] = {
    "sim": {"duration_ticks": 1000, "tick_seconds": 1.0, "seed": 42},
    "dataset": {"path": None, "limit": None},
    "mappings": [
        {
            "source_field": "temperature",
            "target_channel": "BodyTemp",
            "scale": 0.05,
            "offset": 35.5,
            "replay_rate": 100.0,
        }
    ],
    "vitals": {
        "BodyTemp": {
            "normal_low": 36.0,
            "normal_high": 37.0,
            "slope_limit_per_s": 0.002,
        },
        "HRM": {
            "normal_low": 50.0,
            "normal_high": 100.0,
            "slope_limit_per_s": 0.5,
            "generator": {"mean": 72.0, "jitter": 6.0, "exception_prob": 0.03, "rate": 1.0},
        },
        "BP": {
            "normal_low": 100.0,
            "normal_high": 140.0,
            "slope_limit_per_s": 1.0,
            "generator": {"mean": 120.0, "jitter": 8.0, "exception_prob": 0.02, "rate": 1.0},
        },
    },
    "alarms": [
        {
            "id": "low-vitals",
            "combine": "any",
            "conditions": [["HRM", "<", 40.0], ["BP", "<", 90.0]],
        }
    ],
    "workload": {
        "analytics_deadline_s": 0.5,
        "buffer_storage": 100,
        "algorithm_time_s": 0.01,
        "co_capacity": None,
        "report_interval_s": 300.0,
        "retention_window_s": 3600.0,
    },
    "links": {"lorawan_bps": 50000, "gsm_bps": 9600},
    "payloads": {"summary_bytes": 32, "report_bytes": 64, "alarm_bytes": 16},
    "mode": "all",
    "output_dir": "out",
    "emit_trace": False,
}

_VITAL_FIELD_DEFAULTS: dict[str, Any] = {
    "normal_low": None,
    "normal_high": None,
    "raw_payload_bytes": 16,
    "flush_period_s": 60.0,
    "buffer_capacity": 100,
    "slope_limit_per_s": None,
    "generator": None,
}

_KNOWN_KEYS: dict[str, set[str]] = {
    "": set(DEFAULT_CONFIG),
    "sim": {"duration_ticks", "tick_seconds", "seed"},
    "dataset": {"path", "limit"},
    "mappings[]": {"source_field", "target_channel", "scale", "offset", "replay_rate"},
    "vitals{}": set(_VITAL_FIELD_DEFAULTS),
    "generator": {"mean", "jitter", "exception_prob", "rate"},
    "alarms[]": {"id", "combine", "conditions"},
    "workload": {
        "analytics_deadline_s",
        "buffer_storage",
        "algorithm_time_s",
        "co_capacity",
        "report_interval_s",
        "retention_window_s",
    },
    "links": {"lorawan_bps", "gsm_bps"},
    "payloads": {"summary_bytes", "report_bytes", "alarm_bytes"},
}


def _reject_unknown(mapping: dict, known: set[str], path: str) -> None:
    for key in mapping:
        if key not in known:
            raise ConfigError(f"unknown config key: {path}{key}")


def _check_schema(raw: dict) -> None:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(raw, _KNOWN_KEYS[""], "")
    for section in ("sim", "dataset", "workload", "links", "payloads"):
        if section in raw:
            if not isinstance(raw[section], dict):
                raise ConfigError(f"config key {section} must be an object")
            _reject_unknown(raw[section], _KNOWN_KEYS[section], section + ".")
    for i, m in enumerate(raw.get("mappings", [])):
        _reject_unknown(m, _KNOWN_KEYS["mappings[]"], f"mappings[{i}].")
    vitals = raw.get("vitals", {})
    if not isinstance(vitals, dict):
        raise ConfigError("config key vitals must be an object")
    for name, fields in vitals.items():
        _reject_unknown(fields, _KNOWN_KEYS["vitals{}"], f"vitals.{name}.")
        gen = fields.get("generator")
        if gen is not None:
            _reject_unknown(gen, _KNOWN_KEYS["generator"], f"vitals.{name}.generator.")
    for i, rule in enumerate(raw.get("alarms", [])):
        _reject_unknown(rule, _KNOWN_KEYS["alarms[]"], f"alarms[{i}].")


def _merged(raw: dict) -> dict:
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for section in ("sim", "dataset", "workload", "links", "payloads"):
        if section in raw:
            merged[section].update(raw[section])
    for section in ("mappings", "vitals", "alarms"):
        if section in raw:
            merged[section] = copy.deepcopy(raw[section])
    for key in ("mode", "output_dir", "emit_trace"):
        if key in raw:
            merged[key] = raw[key]
    # normalize vitals to the full field set for a stable round-trip
    vitals = {}
    for name, fields in merged["vitals"].items():
        full = dict(_VITAL_FIELD_DEFAULTS)
        full.update(fields)
        vitals[name] = full
    merged["vitals"] = vitals
    return merged


def _channel(name: str, path: str) -> Channel:
    try:
        return Channel(name)
    except ValueError:
        raise ConfigError(f"{path}: unknown channel {name!r}") from None


@dataclass(slots=True)
class RunConfig:
    sim: SimConfig
    dataset_path: str | None
    dataset_limit: int | None
    mappings: list[ChannelMapping]
    vitals: dict[Channel, VitalSpec]
    alarms: list[AlarmRule]
    workload: WorkloadParams
    link_rates: dict[str, int]
    summary_bytes: int
    report_bytes: int
    alarm_bytes: int
    mode: str
    output_dir: str
    emit_trace: bool
    normalized: dict[str, Any]

    def serialize(self) -> str:
        return json.dumps(self.normalized, indent=2, sort_keys=True) + "\n"


def _build(merged: dict) -> RunConfig:
    try:
        sim = SimConfig(
            duration_ticks=int(merged["sim"]["duration_ticks"]),
            seed=int(merged["sim"]["seed"]),
            tick_seconds=float(merged["sim"]["tick_seconds"]),
        )
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from exc

    vitals: dict[Channel, VitalSpec] = {}
    for name, fields in merged["vitals"].items():
        channel = _channel(name, f"vitals.{name}")
        gen_fields = fields["generator"]
        try:
            generator = GeneratorProfile(**gen_fields) if gen_fields is not None else None
            vitals[channel] = VitalSpec(
                channel=channel,
                normal_low=fields["normal_low"],
                normal_high=fields["normal_high"],
                raw_payload_bytes=int(fields["raw_payload_bytes"]),
                flush_period_us=us_from_seconds(float(fields["flush_period_s"])),
                buffer_capacity=int(fields["buffer_capacity"]),
                slope_limit=fields["slope_limit_per_s"],
                generator=generator,
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"vitals.{name}: {exc}") from exc

    mappings: list[ChannelMapping] = []
    for i, m in enumerate(merged["mappings"]):
        channel = _channel(m["target_channel"], f"mappings[{i}].target_channel")
        if channel not in vitals:
            raise ConfigError(
                f"mappings[{i}]: target_channel {channel.value} has no vitals entry"
            )
        try:
            mappings.append(
                ChannelMapping(
                    source_field=m["source_field"],
                    target_channel=channel,
                    scale=float(m["scale"]),
                    offset=float(m["offset"]),
                    replay_rate=float(m["replay_rate"]),
                )
            )
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"mappings[{i}]: {exc}") from exc

    alarms: list[AlarmRule] = []
    for i, rule in enumerate(merged["alarms"]):
        atoms = []
        for j, cond in enumerate(rule.get("conditions", [])):
            if not (isinstance(cond, (list, tuple)) and len(cond) == 3):
                raise ConfigError(f"alarms[{i}].conditions[{j}]: expected [channel, comparator, threshold]")
            channel = _channel(cond[0], f"alarms[{i}].conditions[{j}]")
            if channel not in vitals:
                raise ConfigError(
                    f"alarms[{i}].conditions[{j}]: channel {channel.value} has no vitals entry"
                )
            try:
                atoms.append(AlarmAtom(channel=channel, comparator=cond[1], threshold=float(cond[2])))
            except ValueError as exc:
                raise ConfigError(f"alarms[{i}].conditions[{j}]: {exc}") from exc
        try:
            alarms.append(
                AlarmRule(
                    identifier=str(rule.get("id", f"rule-{i}")),
                    atoms=tuple(atoms),
                    combine=rule.get("combine", "any"),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"alarms[{i}]: {exc}") from exc

    try:
        workload = WorkloadParams(
            analytics_deadline_us=us_from_seconds(float(merged["workload"]["analytics_deadline_s"])),
            buffer_storage=int(merged["workload"]["buffer_storage"]),
            algorithm_time_us=us_from_seconds(float(merged["workload"]["algorithm_time_s"])),
            co_capacity=merged["workload"]["co_capacity"],
            report_interval_us=us_from_seconds(float(merged["workload"]["report_interval_s"])),
            retention_window_us=us_from_seconds(float(merged["workload"]["retention_window_s"])),
        )
    except ValueError as exc:
        raise ConfigError(f"workload: {exc}") from exc

    link_rates = {
        LORAWAN: int(merged["links"]["lorawan_bps"]),
        GSM: int(merged["links"]["gsm_bps"]),
    }
    for name, rate in link_rates.items():
        if rate <= 0:
            raise ConfigError(f"links.{name}_bps must be > 0")

    for key in ("summary_bytes", "report_bytes", "alarm_bytes"):
        if int(merged["payloads"][key]) <= 0:
            raise ConfigError(f"payloads.{key} must be > 0")

    mode = merged["mode"]
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")

    return RunConfig(
        sim=sim,
        dataset_path=merged["dataset"]["path"],
        dataset_limit=merged["dataset"]["limit"],
        mappings=mappings,
        vitals=vitals,
        alarms=alarms,
        workload=workload,
        link_rates=link_rates,
        summary_bytes=int(merged["payloads"]["summary_bytes"]),
        report_bytes=int(merged["payloads"]["report_bytes"]),
        alarm_bytes=int(merged["payloads"]["alarm_bytes"]),
        mode=mode,
        output_dir=merged["output_dir"],
        emit_trace=bool(merged["emit_trace"]),
        normalized=merged,
    )


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Load, default, and validate a run configuration.

    `overrides` holds already-parsed values (CLI flags) that take precedence
    over the file; `path=None` yields the documented defaults.
    """
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    _check_schema(raw)
    merged = _merged(raw)
    if overrides:
        for key, value in overrides.items():
            section, _, leaf = key.partition(".")
            if leaf:
                merged[section][leaf] = value
            else:
                merged[section] = value
    return _build(merged)
