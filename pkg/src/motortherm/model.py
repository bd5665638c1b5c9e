"""Two-resistor motor thermal model with learnable log-scale corrections.

Units throughout: temperatures in degC, tension in N, time in s, heat
capacity in J/K, thermal resistance in K/W, heat coefficient in J/(N^2 s).

The learnable model is::

    dc1/dt = W1 e^P1 f^2 - (c1 - c2) / (W2 e^P2)
    dc2/dt = (c1 - c2) / (W3 e^P3) - (c2 - W5 (1 + P5)) / (W4 e^P4)

with ``W1 = K/C1, W2 = R1 C1, W3 = R1 C2, W4 = R2 C2, W5 = ambient``.
All P = 0 gives back the datasheet model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np


class InvalidSpecError(ValueError):
    """A motor constant is non-positive or otherwise unusable."""


@dataclass(frozen=True)
class RawMotorConstants:
    """Electrical and drivetrain constants that fold into ``K``."""

    winding_resistance: float  # ohm
    torque_constant: float  # N m / A
    efficiency_motor: float
    efficiency_gear: float
    gear_ratio: float
    pulley_radius: float  # m


def k_from_raw(raw: RawMotorConstants) -> float:
    """Heat coefficient ``K = R_e (D_pulley / (E_gear D_gear E_motor K_t))^2``."""
    values = (
        raw.winding_resistance,
        raw.torque_constant,
        raw.efficiency_motor,
        raw.efficiency_gear,
        raw.gear_ratio,
        raw.pulley_radius,
    )
    if not all(math.isfinite(v) and v > 0 for v in values):
        raise InvalidSpecError(f"raw motor constants must be positive: {raw}")
    ratio = raw.pulley_radius / (
        raw.efficiency_gear * raw.gear_ratio * raw.efficiency_motor * raw.torque_constant
    )
    return raw.winding_resistance * ratio * ratio


def capacity_from_time_constant(time_constant: float, resistance: float) -> float:
    """Approximate a heat capacity as ``T / R`` from a datasheet time constant."""
    if not (time_constant > 0 and resistance > 0):
        raise InvalidSpecError(
            f"time constant and resistance must be positive, got T={time_constant}, R={resistance}"
        )
    return time_constant / resistance


@dataclass(frozen=True)
class MotorSpec:
    """Datasheet constants of one motor + drivetrain."""

    C1: float  # core heat capacity, J/K
    C2: float  # housing heat capacity, J/K
    R1: float  # core -> housing, K/W
    R2: float  # housing -> ambient, K/W
    K: float  # J/(N^2 s)
    raw: Optional[RawMotorConstants] = None
    T1: Optional[float] = None  # s
    T2: Optional[float] = None  # s
    name: str = "custom"

    def validate(self) -> None:
        for key in ("C1", "C2", "R1", "R2", "K"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                raise InvalidSpecError(f"{key} must be positive and finite, got {value}")
        if self.raw is not None:
            k_raw = k_from_raw(self.raw)
            if abs(k_raw - self.K) > 1e-9 * abs(self.K):
                raise InvalidSpecError(f"K={self.K} disagrees with raw constants (K={k_raw})")

    @classmethod
    def from_dict(cls, data: dict) -> "MotorSpec":
        data = dict(data)
        raw = data.pop("raw", None)
        if raw is not None:
            raw = RawMotorConstants(**raw)
        if "K" not in data and raw is not None:
            data["K"] = k_from_raw(raw)
        for cap, tc, res in (("C1", "T1", "R1"), ("C2", "T2", "R2")):
            if cap not in data and data.get(tc) is not None:
                data[cap] = capacity_from_time_constant(data[tc], data[res])
        spec = cls(raw=raw, **data)
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "C1": self.C1,
            "C2": self.C2,
            "R1": self.R1,
            "R2": self.R2,
            "K": self.K,
        }
        if self.raw is not None:
            out["raw"] = dict(self.raw.__dict__)
        if self.T1 is not None:
            out["T1"] = self.T1
        if self.T2 is not None:
            out["T2"] = self.T2
        return out


# Maxon datasheet values for the two muscle modules.
EC4POLE_22_90W = MotorSpec(C1=2.10, C2=29.0, R1=1.20, R2=10.3, K=2.97e-4, name="EC4pole90W")
EC16_60W = MotorSpec(C1=1.19, C2=12.2, R1=4.30, R2=39.5, K=4.50e-5, name="EC16_60W")

MOTORS = {EC4POLE_22_90W.name: EC4POLE_22_90W, EC16_60W.name: EC16_60W}


def _zeros5() -> tuple:
    return (0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ThermalParams:
    """Frozen base constants ``W`` and learnable offsets ``P`` (both length 5)."""

    W: tuple
    P: tuple = field(default_factory=_zeros5)

    def __post_init__(self) -> None:
        w = tuple(float(v) for v in self.W)
        p = tuple(float(v) for v in self.P)
        if len(w) != 5 or len(p) != 5:
            raise ValueError("W and P must both have length 5")
        if not all(v > 0 for v in w[:4]):
            raise InvalidSpecError(f"W1..W4 must be positive, got {w[:4]}")
        object.__setattr__(self, "W", w)
        object.__setattr__(self, "P", p)

    @property
    def p(self) -> np.ndarray:
        return np.array(self.P)

    def with_p(self, p: Sequence[float]) -> "ThermalParams":
        return replace(self, P=tuple(float(v) for v in p))

    def coefficients(self) -> tuple:
        """``(a1, a2, a3, a4, ambient)``: the effective model constants."""
        w, p = self.W, self.P
        return (
            w[0] * math.exp(p[0]),
            w[1] * math.exp(p[1]),
            w[2] * math.exp(p[2]),
            w[3] * math.exp(p[3]),
            w[4] * (1.0 + p[4]),
        )

    def to_dict(self) -> dict:
        return {"W": list(self.W), "P": list(self.P)}

    @classmethod
    def from_dict(cls, data: dict) -> "ThermalParams":
        return cls(W=tuple(data["W"]), P=tuple(data["P"]))


@dataclass(frozen=True)
class ThermalState:
    c1: float  # core, degC
    c2: float  # housing, degC


def params_from_spec(spec: MotorSpec, ambient: float) -> ThermalParams:
    spec.validate()
    if not math.isfinite(ambient):
        raise InvalidSpecError(f"ambient must be finite, got {ambient}")
    return ThermalParams(
        W=(spec.K / spec.C1, spec.R1 * spec.C1, spec.R1 * spec.C2, spec.R2 * spec.C2, ambient)
    )


def derivatives(state: ThermalState, f: float, params: ThermalParams) -> tuple:
    """Time derivatives ``(dc1, dc2)`` in degC/s; dc1 is evaluated before dc2."""
    a1, a2, a3, a4, amb = params.coefficients()
    diff = state.c1 - state.c2
    dc1 = a1 * f * f - diff / a2
    dc2 = diff / a3 - (state.c2 - amb) / a4
    return dc1, dc2


def step(state: ThermalState, f: float, params: ThermalParams, dt: float) -> ThermalState:
    """One forward-Euler step of length ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    dc1, dc2 = derivatives(state, f, params)
    return ThermalState(state.c1 + dc1 * dt, state.c2 + dc2 * dt)


def rollout_arrays(
    c1: float, c2: float, tensions: Sequence[float], coeffs: tuple, dt: float
) -> tuple:
    """Euler rollout on plain floats; returns lists ``(c1s, c2s)`` of the
    ``len(tensions)`` states *after* each step.

    This is the hot loop shared by the learner, controller and simulator.
    Per step: ``diff = c1 - c2``, then c1 and c2 are updated from the
    pre-step values.
    """
    a1, a2, a3, a4, amb = coeffs
    c1s = []
    c2s = []
    for f in tensions:
        diff = c1 - c2
        n1 = c1 + (a1 * f * f - diff / a2) * dt
        c2 = c2 + (diff / a3 - (c2 - amb) / a4) * dt
        c1 = n1
        c1s.append(c1)
        c2s.append(c2)
    return c1s, c2s


def rollout(
    initial: ThermalState, tensions: Sequence[float], params: ThermalParams, dt: float
) -> list:
    """States after each of ``len(tensions)`` Euler steps; step j uses ``tensions[j]``."""
    if len(tensions) == 0:
        raise ValueError("tension sequence must be non-empty")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    c1s, c2s = rollout_arrays(initial.c1, initial.c2, tensions, params.coefficients(), dt)
    return [ThermalState(a, b) for a, b in zip(c1s, c2s)]


def steady_state(f: float, params: ThermalParams) -> ThermalState:
    """Analytic fixed point of the continuous dynamics under constant ``f``."""
    a1, a2, a3, a4, amb = params.coefficients()
    rise = a1 * a2 * f * f
    c2 = amb + (a4 / a3) * rise
    return ThermalState(c2 + rise, c2)
