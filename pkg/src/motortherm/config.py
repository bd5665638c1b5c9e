"""Scenario configuration: one JSON document holds every tunable default."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .controller import ControllerConfig
from .estimator import EstimatorConfig
from .learner import LearnerConfig
from .limiter import LimiterConfig
from .model import MOTORS, MotorSpec

SCENARIOS = ("sim-learn", "sim-quant", "sim-fault", "sim-control", "closed-loop", "replay")

DEFAULT_P_SIM = (0.5, 0.5, -0.5, -0.5, 0.5)


class UsageError(ValueError):
    """Bad configuration or command-line usage."""


@dataclass
class FaultSettings:
    kind: str = "none"  # none | stuck_sensor | stuck_tension
    value: float = 0.0


@dataclass
class PlantSettings:
    p_sim: tuple = DEFAULT_P_SIM
    dt_plant: float = 0.02
    initial_c1: float = 30.0
    initial_c2: float = 30.0
    fault: FaultSettings = field(default_factory=FaultSettings)


@dataclass
class WalkSettings:
    f_init: float = 100.0
    lo: float = 10.0
    hi: float = 200.0
    step: float = 50.0


@dataclass
class AnomalySettings:
    d_detect: float = 1.0
    arm: str = "auto"  # start | auto | never
    arm_tolerance: float = 0.05
    arm_k: int = 5


@dataclass
class MuscleSettings:
    stiffness: float = 12.5  # N/mm
    l_ref: float = -16.0  # mm


@dataclass
class QuantSettings:
    n_plants: int = 10
    target_rmse: float = 0.5
    checkpoint: float = 600.0  # s


@dataclass
class ControlSettings:
    initial_temps: tuple = (60.0, 75.0)
    # "learned": run the learning scenario first (or load params_path);
    # "default": datasheet model with P = 0
    model: str = "learned"
    params_path: Optional[str] = None
    learn_duration: float = 3600.0


@dataclass
class ScenarioConfig:
    scenario: str = "sim-learn"
    duration: float = 3600.0
    seed: int = 0
    motor: str = "EC4pole90W"  # preset name or path to a JSON MotorSpec
    ambient: float = 30.0
    trace_dt: float = 1.0
    telemetry: bool = False
    plant: PlantSettings = field(default_factory=PlantSettings)
    walk: WalkSettings = field(default_factory=WalkSettings)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    anomaly: AnomalySettings = field(default_factory=AnomalySettings)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    limiter: LimiterConfig = field(default_factory=LimiterConfig)
    muscle: MuscleSettings = field(default_factory=MuscleSettings)
    quant: QuantSettings = field(default_factory=QuantSettings)
    control: ControlSettings = field(default_factory=ControlSettings)

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise UsageError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if not self.duration > 0:
            raise UsageError("duration must be positive")
        if not self.trace_dt > 0:
            raise UsageError("trace_dt must be positive")
        if self.anomaly.arm not in ("start", "auto", "never"):
            raise UsageError(f"unknown arm mode {self.anomaly.arm!r}")
        if self.control.model not in ("learned", "default"):
            raise UsageError(f"unknown control model {self.control.model!r}")

    def motor_spec(self) -> MotorSpec:
        if self.motor in MOTORS:
            return MOTORS[self.motor]
        path = Path(self.motor)
        if not path.exists():
            raise UsageError(f"unknown motor {self.motor!r}: not a preset {sorted(MOTORS)} or a file")
        return MotorSpec.from_dict(json.loads(path.read_text()))


# Per-scenario defaults applied before user overrides.
SCENARIO_DEFAULTS = {
    "sim-learn": {},
    "sim-quant": {},
    "sim-fault": {
        "duration": 2000.0,
        "plant": {"p_sim": [0.0] * 5, "fault": {"kind": "stuck_sensor", "value": 30.0}},
        "anomaly": {"arm": "start"},
    },
    "sim-control": {"duration": 300.0},
    "closed-loop": {"duration": 600.0, "plant": {"p_sim": [0.0] * 5}},
    "replay": {},
}


def to_dict(cfg: ScenarioConfig) -> dict:
    def conv(value: Any) -> Any:
        if dataclasses.is_dataclass(value):
            return {f.name: conv(getattr(value, f.name)) for f in dataclasses.fields(value)}
        if isinstance(value, tuple):
            return [conv(v) for v in value]
        return value

    return conv(cfg)


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise UsageError(f"{where}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise UsageError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        sub = _nested_types.get((cls, name))
        if sub is not None:
            kwargs[name] = _build(sub, value, f"{where}.{name}")
        elif isinstance(value, list):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{where}: {exc}") from exc


_nested_types = {
    (ScenarioConfig, "plant"): PlantSettings,
    (PlantSettings, "fault"): FaultSettings,
    (ScenarioConfig, "walk"): WalkSettings,
    (ScenarioConfig, "estimator"): EstimatorConfig,
    (ScenarioConfig, "learner"): LearnerConfig,
    (ScenarioConfig, "anomaly"): AnomalySettings,
    (ScenarioConfig, "controller"): ControllerConfig,
    (ScenarioConfig, "limiter"): LimiterConfig,
    (ScenarioConfig, "muscle"): MuscleSettings,
    (ScenarioConfig, "quant"): QuantSettings,
    (ScenarioConfig, "control"): ControlSettings,
}


def merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def from_dict(data: dict) -> ScenarioConfig:
    cfg = _build(ScenarioConfig, data, "config")
    cfg.validate()
    return cfg


def resolve(scenario: str, overrides: Optional[dict] = None) -> ScenarioConfig:
    """Defaults, then scenario defaults, then ``overrides`` (file or flags)."""
    if scenario not in SCENARIO_DEFAULTS:
        raise UsageError(f"unknown scenario {scenario!r}")
    data = merge(to_dict(ScenarioConfig()), SCENARIO_DEFAULTS[scenario])
    data = merge(data, overrides or {})
    data["scenario"] = scenario
    return from_dict(data)


def load_file(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
