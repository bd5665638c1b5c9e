"""Online thermal-parameter learning, fault detection and tension limiting for small motors."""

from .anomaly import ANOMALY, NORMAL, AnomalyConfig, anomaly_arm, anomaly_check, anomaly_score
from .controller import ControllerConfig, TensionPlan, controller_tick, sustainable_tension
from .estimator import EstimatorConfig, EstimatorState, estimator_advance, estimator_init, estimator_tick
from .learner import LearnerConfig, SampleWindow, learner_push, learner_update, window_loss
from .limiter import LimiterConfig, LimiterState, apply_offset, limiter_tick
from .model import (
    EC4POLE_22_90W,
    EC16_60W,
    MOTORS,
    InvalidSpecError,
    MotorSpec,
    ThermalParams,
    ThermalState,
    params_from_spec,
    rollout,
    step,
)
from .pipeline import MotorPipeline, PipelineConfig
from .sim import FaultMode, Plant, PlantConfig

__version__ = "0.1.0"

__all__ = [
    "ANOMALY",
    "NORMAL",
    "AnomalyConfig",
    "anomaly_arm",
    "anomaly_check",
    "anomaly_score",
    "ControllerConfig",
    "TensionPlan",
    "controller_tick",
    "sustainable_tension",
    "EstimatorConfig",
    "EstimatorState",
    "estimator_advance",
    "estimator_init",
    "estimator_tick",
    "LearnerConfig",
    "SampleWindow",
    "learner_push",
    "learner_update",
    "window_loss",
    "LimiterConfig",
    "LimiterState",
    "apply_offset",
    "limiter_tick",
    "EC4POLE_22_90W",
    "EC16_60W",
    "MOTORS",
    "InvalidSpecError",
    "MotorSpec",
    "ThermalParams",
    "ThermalState",
    "params_from_spec",
    "rollout",
    "step",
    "MotorPipeline",
    "PipelineConfig",
    "FaultMode",
    "Plant",
    "PlantConfig",
]
