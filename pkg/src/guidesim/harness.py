"""Scenario files, batch execution, and result aggregation.

A scenario is a JSON document ``{"task": ..., "seed": ..., "params": {...},
"ground_truth": {...}}``. ``params`` carries difficulty and pipeline knobs
(validated per task, unknown fields rejected); ``ground_truth`` optionally
pins parts of the generated payload, e.g. a fixed target name. Identical
documents and seeds reproduce byte-identical results.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .errors import ScenarioSchemaError
from .pipelines import RunConfig, RunRecord, run_scenario
from .world import BehaviorParams, Scene, TaskKind, generate_scene

_COMMON_PARAMS = {"timeout_s": float, "pilot_error_rate": float}
_NAV_PARAMS = {
    "obstacle_count": int, "min_clearance": float,
    "boundary_length": float, "boundary_width": float,
    "resolution": float, "pilot_speed": float,
    "edge_noise_sigma": float, "edge_outlier_fraction": float,
    "depth_noise_sigma": float,
}
_PARAM_SCHEMA = {
    TaskKind.SIDEWALK: _NAV_PARAMS,
    TaskKind.FOOTPATH: _NAV_PARAMS,
    TaskKind.FOREST: _NAV_PARAMS,
    TaskKind.DOORBELL: {"n_rows": int, "n_cols": int, "ocr_error_rate": float},
    TaskKind.SEATS: {"occupied_count": int, "leak_points": int},
    TaskKind.GROCERY: {"ocr_error_rate": float},
    TaskKind.COLOURS: {},
    TaskKind.FINDER: {"object_count": int},
    TaskKind.TOUCHSCREEN: {"corner_noise_px": float},
}
_GROUND_TRUTH_KEYS = {
    TaskKind.SIDEWALK: set(), TaskKind.FOOTPATH: set(), TaskKind.FOREST: set(),
    TaskKind.DOORBELL: {"names", "target_name", "target_cell", "n_rows", "n_cols"},
    TaskKind.SEATS: {"occupied"},
    TaskKind.GROCERY: {"grid", "target", "target_cell"},
    TaskKind.COLOURS: {"colours", "palette", "order", "arrival"},
    TaskKind.FINDER: {"objects", "target", "target_dir"},
    TaskKind.TOUCHSCREEN: {"grid", "target_cell"},
}
_SCENE_PARAM_KEYS = {"obstacle_count", "min_clearance", "boundary_length",
                     "boundary_width", "n_rows", "n_cols", "occupied_count",
                     "object_count"}


@dataclass(frozen=True)
class ScenarioDoc:
    task: TaskKind
    seed: int
    params: dict = field(default_factory=dict)
    ground_truth: dict = field(default_factory=dict)


def _check_number(name, value, expect):
    if expect is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioSchemaError(f"param {name!r} must be an integer")
    elif expect is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioSchemaError(f"param {name!r} must be a number")
        if not math.isfinite(float(value)):
            raise ScenarioSchemaError(f"param {name!r} must be finite")


def validate_scenario(doc: dict) -> ScenarioDoc:
    """Validate a raw scenario dict against the documented schema."""
    if not isinstance(doc, dict):
        raise ScenarioSchemaError("scenario must be a JSON object")
    unknown = set(doc) - {"task", "seed", "params", "ground_truth"}
    if unknown:
        raise ScenarioSchemaError(f"unknown scenario fields: {sorted(unknown)}")
    if "task" not in doc or "seed" not in doc:
        raise ScenarioSchemaError("scenario requires 'task' and 'seed'")
    try:
        task = TaskKind(doc["task"])
    except ValueError:
        raise ScenarioSchemaError(
            f"unknown task {doc['task']!r}; expected one of "
            f"{[t.value for t in TaskKind]}") from None
    if isinstance(doc["seed"], bool) or not isinstance(doc["seed"], int):
        raise ScenarioSchemaError("'seed' must be an integer")

    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioSchemaError("'params' must be an object")
    allowed = dict(_COMMON_PARAMS)
    allowed.update(_PARAM_SCHEMA[task])
    for key, value in params.items():
        if key not in allowed:
            raise ScenarioSchemaError(
                f"unknown param {key!r} for task {task.value!r}")
        _check_number(key, value, allowed[key])

    gt = doc.get("ground_truth", {})
    if not isinstance(gt, dict):
        raise ScenarioSchemaError("'ground_truth' must be an object")
    bad = set(gt) - _GROUND_TRUTH_KEYS[task]
    if bad:
        raise ScenarioSchemaError(
            f"unknown ground_truth fields for {task.value!r}: {sorted(bad)}")
    return ScenarioDoc(task, int(doc["seed"]), dict(params), dict(gt))


def load_scenario(path) -> ScenarioDoc:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioSchemaError(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioSchemaError(f"invalid JSON in {path}: {exc}") from exc
    return validate_scenario(doc)


def build_scene(doc: ScenarioDoc, seed: int | None = None) -> Scene:
    """Instantiate the scenario's scene, applying ground-truth overrides."""
    scene_params = {k: v for k, v in doc.params.items() if k in _SCENE_PARAM_KEYS}
    scene = generate_scene(doc.task, doc.seed if seed is None else seed, scene_params)
    if doc.ground_truth:
        payload = dict(scene.payload)
        payload.update(doc.ground_truth)
        scene = replace(scene, payload=payload)
    return scene


def config_from_params(doc: ScenarioDoc, timeout_override: float | None = None) -> RunConfig:
    p = doc.params
    config = RunConfig()
    if "timeout_s" in p:
        config.timeout_s = float(p["timeout_s"])
    if timeout_override is not None:
        config.timeout_s = float(timeout_override)
    if "pilot_error_rate" in p:
        config.pilot_error_rate = float(p["pilot_error_rate"])
    if "resolution" in p:
        config.resolution = float(p["resolution"])
    if "edge_noise_sigma" in p:
        config.edge_noise_sigma = float(p["edge_noise_sigma"])
    if "edge_outlier_fraction" in p:
        config.edge_outlier_fraction = float(p["edge_outlier_fraction"])
    if "depth_noise_sigma" in p:
        config.depth_noise_sigma = float(p["depth_noise_sigma"])
    if "pilot_speed" in p:
        config.behavior = BehaviorParams(speed=float(p["pilot_speed"]))
    if "ocr_error_rate" in p:
        config.ocr_error_rate = float(p["ocr_error_rate"])
    if "leak_points" in p:
        config.seat_leak_points = int(p["leak_points"])
    if "corner_noise_px" in p:
        config.corner_noise_px = float(p["corner_noise_px"])
    return config


def execute(doc: ScenarioDoc, seed: int, timeout_override: float | None = None) -> RunRecord:
    """Build the scene for one seed and run its pipeline."""
    scene = build_scene(doc, seed)
    config = config_from_params(doc, timeout_override)
    return run_scenario(scene, config, seed)


def scene_to_scenario(scene: Scene, params: dict | None = None) -> dict:
    """Serialize a scene as a scenario document that regenerates it."""
    return {
        "task": scene.task_kind.value,
        "seed": scene.seed,
        "params": dict(params or {}),
        "ground_truth": dict(scene.payload),
    }


# ------------------------------------------------------------------- results

CSV_COLUMNS = ("task", "seed", "device_success", "pilot_success",
               "duration_s", "failure_reason")


def _bool_str(value: bool | None) -> str:
    if value is None:
        return "na"
    return "true" if value else "false"


def _bool_parse(text: str) -> bool | None:
    return {"true": True, "false": False, "na": None}[text]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.task, r.seed, _bool_str(r.device_success),
                         _bool_str(r.pilot_success), f"{r.duration_s:.3f}",
                         r.failure_reason])
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ScenarioSchemaError(f"unexpected results header: {header}")
    out = []
    for row in reader:
        if not row:
            continue
        task, seed, device, pilot, duration, reason = row
        out.append(RunRecord(task, int(seed), _bool_parse(device),
                             bool(_bool_parse(pilot)), float(duration), reason))
    return out


# ----------------------------------------------------------------- aggregate

@dataclass(frozen=True)
class TaskStats:
    runs: int
    device_pct: float | None
    pilot_pct: float
    time_mean: float
    time_std: float


@dataclass(frozen=True)
class AggregateTable:
    per_task: dict[str, TaskStats]
    overall_device_pct: float
    overall_pilot_pct: float
    total_time_s: float


def round_half_up(x: float, ndigits: int = 1) -> float:
    exp = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(float(x))).quantize(exp, rounding=ROUND_HALF_UP))


def aggregate(records) -> AggregateTable:
    """Per-task means and the overall row.

    The overall device percentage averages the per-task device percentages of
    tasks with device involvement (device recorded as true/false); the
    overall pilot percentage averages over all tasks, device-free ones
    included. Total time is the sum of per-task mean times. Values are
    computed over sorted groups, so the result is independent of record
    order.
    """
    if not records:
        raise ValueError("no records to aggregate")
    tasks = sorted({r.task for r in records})
    per_task = {}
    for task in tasks:
        group = [r for r in records if r.task == task]
        durations = sorted(r.duration_s for r in group)
        n = len(durations)
        mean = sum(durations) / n
        std = math.sqrt(sum((d - mean) ** 2 for d in durations) / (n - 1)) if n > 1 else 0.0
        device_flags = [r.device_success for r in group if r.device_success is not None]
        device_pct = 100.0 * sum(device_flags) / len(device_flags) if device_flags else None
        pilot_pct = 100.0 * sum(1 for r in group if r.pilot_success) / n
        per_task[task] = TaskStats(n, device_pct, pilot_pct, mean, std)

    with_device = [s.device_pct for s in per_task.values() if s.device_pct is not None]
    overall_device = sum(with_device) / len(with_device) if with_device else math.nan
    overall_pilot = sum(s.pilot_pct for s in per_task.values()) / len(per_task)
    total_time = sum(s.time_mean for s in per_task.values())
    return AggregateTable(per_task, overall_device, overall_pilot, total_time)


_TASK_ORDER = [t.value for t in TaskKind]


def _fmt_pct(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    r = round_half_up(value, 1)
    return str(int(r)) if r == int(r) else f"{r:.1f}"


def _fmt_time(mean: float, std: float | None) -> str:
    m = round_half_up(mean, 1)
    m_str = str(int(m)) if m == int(m) else f"{m:.1f}"
    if std is None:
        return m_str
    s = round_half_up(std, 1)
    s_str = str(int(s)) if s == int(s) else f"{s:.1f}"
    return f"{m_str} +- {s_str}"


def format_table(table: AggregateTable) -> str:
    """Render the aggregate in the metrics-as-rows, tasks-as-columns layout."""
    tasks = sorted(table.per_task,
                   key=lambda t: (_TASK_ORDER.index(t) if t in _TASK_ORDER else len(_TASK_ORDER), t))
    headers = ["Task"] + tasks + ["All"]
    device_row = (["Success Device [%]"]
                  + [_fmt_pct(table.per_task[t].device_pct) for t in tasks]
                  + [_fmt_pct(table.overall_device_pct)])
    pilot_row = (["Success Pilot [%]"]
                 + [_fmt_pct(table.per_task[t].pilot_pct) for t in tasks]
                 + [_fmt_pct(table.overall_pilot_pct)])
    time_row = (["Time [s]"]
                + [_fmt_time(table.per_task[t].time_mean, table.per_task[t].time_std) for t in tasks]
                + [str(int(round_half_up(table.total_time_s, 0)))])
    rows = [headers, device_row, pilot_row, time_row]
    widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
    lines = []
    for k, row in enumerate(rows):
        lines.append(" | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if k == 0:
            lines.append("-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
