"""Ground-truth actuator plant, tension generators and fault injection.

Randomness comes from ``numpy.random.Generator`` with the PCG64 bit
generator, whose streams are platform independent for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import EC4POLE_22_90W, MotorSpec, ThermalParams, params_from_spec

# Tension range used by the random-walk learning scenarios.
WALK_MIN = 10.0
WALK_MAX = 200.0
WALK_STEP = 50.0


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class FaultMode:
    """``kind`` is ``"none"``, ``"stuck_sensor"`` or ``"stuck_tension"``."""

    kind: str = "none"
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("none", "stuck_sensor", "stuck_tension"):
            raise ValueError(f"unknown fault mode {self.kind!r}")

    @classmethod
    def none(cls) -> "FaultMode":
        return cls()

    @classmethod
    def stuck_sensor(cls, c2_reported: float) -> "FaultMode":
        return cls("stuck_sensor", float(c2_reported))

    @classmethod
    def stuck_tension(cls, f_true: float) -> "FaultMode":
        return cls("stuck_tension", float(f_true))


@dataclass(frozen=True)
class PlantConfig:
    spec: MotorSpec = EC4POLE_22_90W
    p_sim: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)
    ambient: float = 30.0
    dt_plant: float = 0.02
    seed: int = 0
    fault: FaultMode = FaultMode()

    def __post_init__(self) -> None:
        if not self.dt_plant > 0:
            raise ValueError("dt_plant must be positive")

    @property
    def params(self) -> ThermalParams:
        return params_from_spec(self.spec, self.ambient).with_p(self.p_sim)


@dataclass(frozen=True)
class Observation:
    c2: float
    f: float


class Plant:
    """True thermal state of one actuator, integrated by forward Euler.

    The fault mask only touches what is observed, except for a stuck
    tension which replaces the heating input.
    """

    def __init__(self, cfg: PlantConfig, c1: float = 30.0, c2: float = 30.0) -> None:
        self.cfg = cfg
        self.params = cfg.params
        self._coeffs = self.params.coefficients()
        self.c1 = float(c1)
        self.c2 = float(c2)
        self.f_true = 0.0

    def true_tension(self, f_commanded: float) -> float:
        if self.cfg.fault.kind == "stuck_tension":
            return self.cfg.fault.value
        return f_commanded

    def observe(self, f_commanded: float) -> Observation:
        c2 = self.cfg.fault.value if self.cfg.fault.kind == "stuck_sensor" else self.c2
        return Observation(c2=c2, f=f_commanded)

    def step(self, f_commanded: float, dt: Optional[float] = None) -> Observation:
        """Advance by ``dt`` (default ``dt_plant``) and return the new observation."""
        if f_commanded < 0:
            raise ValueError("commanded tension must be non-negative")
        h = self.cfg.dt_plant if dt is None else dt
        a1, a2, a3, a4, amb = self._coeffs
        f = self.true_tension(f_commanded)
        self.f_true = f
        diff = self.c1 - self.c2
        n1 = self.c1 + (a1 * f * f - diff / a2) * h
        self.c2 = self.c2 + (diff / a3 - (self.c2 - amb) / a4) * h
        self.c1 = n1
        return self.observe(f_commanded)


def plant_step(plant: Plant, f_commanded: float, dt: Optional[float] = None) -> tuple:
    """Functional wrapper: ``((c1_true, c2_true), Observation)``."""
    obs = plant.step(f_commanded, dt)
    return (plant.c1, plant.c2), obs


def random_tension_walk(
    rng: np.random.Generator,
    f_prev: float,
    lo: float = WALK_MIN,
    hi: float = WALK_MAX,
    step: float = WALK_STEP,
) -> float:
    """``f_prev + U(-step, step)`` clamped to ``[lo, hi]``."""
    f = f_prev + rng.uniform(-step, step)
    return min(max(f, lo), hi)


def perturbed_params(rng: np.random.Generator, target_rmse: float = 0.5, n: int = 5) -> np.ndarray:
    """Random offset vector whose RMS value is exactly ``target_rmse``."""
    if target_rmse < 0:
        raise ValueError("target_rmse must be non-negative")
    if target_rmse == 0:
        return np.zeros(n)
    direction = rng.standard_normal(n)
    while not np.linalg.norm(direction) > 1e-12:
        direction = rng.standard_normal(n)
    return direction * (target_rmse * math.sqrt(n) / np.linalg.norm(direction))


@dataclass(frozen=True)
class ElasticMuscle:
    """Muscle with a fixed endpoint: pulling (negative command) builds tension."""

    stiffness: float = 12.5  # N/mm
    rest_command: float = 0.0  # mm

    def __post_init__(self) -> None:
        if not self.stiffness > 0:
            raise ValueError("stiffness must be positive")


def elastic_tension(muscle: ElasticMuscle, command: float) -> float:
    return muscle.stiffness * max(0.0, -(command - muscle.rest_command))


def rmse(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.sqrt(np.mean((a - b) ** 2)))
