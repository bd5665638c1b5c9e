"""Offline replay of recorded housing-temperature / tension telemetry.

Input is a UTF-8 CSV with header ``t,c2,f`` and strictly increasing
timestamps. Records run through the same estimator / learner / anomaly
pipeline as the simulator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

from .learner import snapshot_json
from .model import ThermalParams
from .pipeline import MotorPipeline, PipelineConfig
from .scenarios import TRACE_COLUMNS, Artifacts


class TelemetryParseError(ValueError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class TelemetryRecord:
    t: float  # s
    c2: float  # degC
    f: float  # N


def parse_telemetry(lines: Iterable[str]) -> List[TelemetryRecord]:
    records: List[TelemetryRecord] = []
    it = iter(lines)
    header = next(it, None)
    if header is None or not header.strip():
        raise TelemetryParseError(1, "empty telemetry file")
    if [h.strip() for h in header.strip().split(",")] != ["t", "c2", "f"]:
        raise TelemetryParseError(1, f"expected header 't,c2,f', got {header.strip()!r}")
    last_t = -math.inf
    for lineno, line in enumerate(it, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise TelemetryParseError(lineno, f"expected 3 fields, got {len(parts)}")
        try:
            t, c2, f = (float(p) for p in parts)
        except ValueError as exc:
            raise TelemetryParseError(lineno, str(exc)) from exc
        if not all(math.isfinite(v) for v in (t, c2, f)):
            raise TelemetryParseError(lineno, "non-finite value")
        if t <= last_t:
            raise TelemetryParseError(lineno, f"timestamp {t} does not increase")
        if f < 0:
            raise TelemetryParseError(lineno, f"negative tension {f}")
        last_t = t
        records.append(TelemetryRecord(t, c2, f))
    if not records:
        raise TelemetryParseError(2, "no telemetry records")
    return records


def read_telemetry(path: Union[str, Path]) -> List[TelemetryRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_telemetry(fh)


def replay(
    records: List[TelemetryRecord],
    params: ThermalParams,
    cfg: Optional[PipelineConfig] = None,
    artifacts: Optional[Artifacts] = None,
    trace_dt: float = 1.0,
    motor_id: str = "m0",
) -> MotorPipeline:
    pipe = MotorPipeline(params, cfg, motor_id=motor_id)
    trace = artifacts.csv("trace.csv", TRACE_COLUMNS) if artifacts is not None else None
    snapshots = artifacts.lines("params.jsonl") if artifacts is not None else None
    events = artifacts.lines("events.jsonl") if artifacts is not None else None
    t0 = records[0].t
    n_rows = 0
    verdict = pipe.verdict
    for rec in records:
        event = pipe.observe(rec.t, rec.c2, rec.f)
        if event is not None:
            if snapshots is not None:
                snapshots.append(snapshot_json(event.params, motor_id, rec.t, loss=event.loss, g=event.g))
            if events is not None and event.verdict is not None and event.verdict != verdict:
                events.append(snapshot_event(rec.t, motor_id, event.g, event.verdict))
            verdict = event.verdict if event.verdict is not None else verdict
        if trace is not None and rec.t >= t0 + n_rows * trace_dt - 1e-9:
            n_rows += 1
            trace.row((rec.t, None, None, rec.f, None, None, rec.c2, pipe.c1_est, None, None, pipe.g, pipe.verdict))
    if artifacts is not None:
        artifacts.lines("final_params.json").append(snapshot_json(pipe.params, motor_id, records[-1].t))
    return pipe


def snapshot_event(t: float, motor_id: str, g: float, verdict: str) -> str:
    return json.dumps({"timestamp": t, "motor_id": motor_id, "g": g, "verdict": verdict}, sort_keys=True)
