"""Per-motor online pipeline: estimator -> window accumulator -> learner -> anomaly.

The simulator and the telemetry replay both feed observations through
:class:`MotorPipeline`, so a replayed log reproduces a simulated run
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from .anomaly import NORMAL, AnomalyConfig, AutoArm, anomaly_arm, anomaly_check, anomaly_score
from .estimator import EstimatorConfig, EstimatorState, estimator_advance, estimator_init
from .learner import (
    BatchBuffer,
    LearnerConfig,
    WindowAccumulator,
    learner_push,
    learner_update,
)
from .model import ThermalParams

_TIME_EPS = 1e-9


@dataclass
class UpdateEvent:
    t: float
    params: ThermalParams
    loss: float
    g: Optional[float]
    verdict: Optional[str]


@dataclass
class PipelineConfig:
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    anomaly: AnomalyConfig = field(default_factory=AnomalyConfig)
    learn: bool = True
    # "start": reference taken from the initial params; "auto": after the
    # batch loss settles; "never": no anomaly scoring
    arm: str = "auto"
    arm_tolerance: float = 0.05
    arm_k: int = 5

    def __post_init__(self) -> None:
        if self.arm not in ("start", "auto", "never"):
            raise ValueError(f"unknown arm mode {self.arm!r}")


class MotorPipeline:
    def __init__(self, params: ThermalParams, cfg: Optional[PipelineConfig] = None, motor_id: str = "m0"):
        self.cfg = cfg or PipelineConfig()
        self.motor_id = motor_id
        self.params = params
        self.state: Optional[EstimatorState] = None
        self._held: Optional[tuple] = None
        self._acc = WindowAccumulator(self.cfg.learner)
        self._buffer = BatchBuffer(self.cfg.learner.n_batch)
        self._t0: Optional[float] = None
        self._n_samples = 0
        self._auto = AutoArm(self.cfg.arm_tolerance, self.cfg.arm_k)
        self.anomaly: AnomalyConfig = self.cfg.anomaly
        if self.cfg.arm == "start":
            self.anomaly = anomaly_arm(params, self.anomaly)
        self.g: Optional[float] = None
        self.verdict: Optional[str] = None
        self.updates: List[UpdateEvent] = []
        self.first_update_t: Optional[float] = None

    @property
    def c1_est(self) -> float:
        return self.state.c1_est

    def arm(self) -> None:
        self.anomaly = anomaly_arm(self.params, self.anomaly)
        self.g = 0.0
        self.verdict = NORMAL

    def observe(self, t: float, c2: float, f: float, c1_seed: Optional[float] = None) -> Optional[UpdateEvent]:
        """Feed one measurement taken at time ``t``.

        ``c1_seed`` replaces the estimated core temperature in the learner's
        samples (used to compare against a true-core teacher).
        Returns the update event when a parameter step happened.
        """
        est_cfg = self.cfg.estimator
        if self.state is None:
            self.state = estimator_init(c2, est_cfg, t)
            self._t0 = t
        else:
            hc2, hf = self._held
            self.state = estimator_advance(self.state, t, hc2, hf, self.params, est_cfg)
        self._held = (c2, f)

        if not self.cfg.learn:
            return None
        next_sample = self._t0 + self._n_samples * self.cfg.learner.dt_data
        if t < next_sample - _TIME_EPS:
            return None
        self._n_samples += 1
        c1 = self.state.c1_est if c1_seed is None else c1_seed
        window = self._acc.add(t, c1, c2, f)
        if window is None:
            return None
        _, ready = learner_push(self._buffer, window)
        if not ready:
            return None
        result = learner_update(self._buffer, self.params, self.cfg.learner)
        self.params = result.params
        if self.first_update_t is None:
            self.first_update_t = t
        if self.cfg.arm == "auto" and not self.anomaly.armed and self._auto.observe(result.mean_loss):
            self.arm()
        if self.anomaly.armed:
            self.g = anomaly_score(self.params, self.anomaly)
            self.verdict = anomaly_check(self.params, self.anomaly)
        event = UpdateEvent(t, self.params, result.mean_loss, self.g, self.verdict)
        self.updates.append(event)
        return event
