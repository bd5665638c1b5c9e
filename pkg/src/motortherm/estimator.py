"""Running core-temperature estimate from housing temperature and tension.

Only the core equation is integrated; the housing temperature comes from
the sensor at every tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .model import ThermalParams


class MeasurementError(ValueError):
    """A non-finite or negative sensor reading was supplied."""


@dataclass(frozen=True)
class EstimatorConfig:
    dt_est: float = 0.02  # s
    # None -> initialise from the first housing reading
    fixed_ambient: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.dt_est > 0:
            raise ValueError(f"dt_est must be positive, got {self.dt_est}")


@dataclass(frozen=True)
class EstimatorState:
    c1_est: float
    last_update: float = 0.0


def _check(c2_meas: float, f_meas: float) -> None:
    if not (math.isfinite(c2_meas) and math.isfinite(f_meas)):
        raise MeasurementError(f"non-finite measurement c2={c2_meas}, f={f_meas}")
    if f_meas < 0:
        raise MeasurementError(f"tension must be non-negative, got {f_meas}")


def estimator_init(first_c2: float, cfg: EstimatorConfig, t: float = 0.0) -> EstimatorState:
    if not math.isfinite(first_c2):
        raise MeasurementError(f"first housing reading is not finite: {first_c2}")
    c1 = first_c2 if cfg.fixed_ambient is None else float(cfg.fixed_ambient)
    return EstimatorState(c1_est=c1, last_update=t)


def estimator_tick(
    state: EstimatorState,
    c2_meas: float,
    f_meas: float,
    params: ThermalParams,
    cfg: EstimatorConfig,
    dt: Optional[float] = None,
) -> EstimatorState:
    """Advance the core estimate by one Euler step of the core equation.

    ``dt`` defaults to ``cfg.dt_est``. Raises :class:`MeasurementError`
    (leaving the caller's state untouched) on bad input.
    """
    _check(c2_meas, f_meas)
    h = cfg.dt_est if dt is None else dt
    a1, a2 = params.coefficients()[:2]
    c1 = state.c1_est
    c1 = c1 + (a1 * f_meas * f_meas - (c1 - c2_meas) / a2) * h
    return EstimatorState(c1_est=c1, last_update=state.last_update + h)


def estimator_advance(
    state: EstimatorState,
    t: float,
    c2_held: float,
    f_held: float,
    params: ThermalParams,
    cfg: EstimatorConfig,
) -> EstimatorState:
    """Integrate from ``state.last_update`` to ``t`` holding the measurements.

    Gaps longer than ``dt_est`` are split into ``ceil(gap / dt_est)`` equal
    sub-steps so the Euler step never exceeds ``dt_est``.
    """
    _check(c2_held, f_held)
    gap = t - state.last_update
    if gap <= 0:
        return state
    n = max(1, math.ceil(gap / cfg.dt_est - 1e-9))
    h = gap / n
    a1, a2 = params.coefficients()[:2]
    heat = a1 * f_held * f_held
    c1 = state.c1_est
    for _ in range(n):
        c1 = c1 + (heat - (c1 - c2_held) / a2) * h
    return EstimatorState(c1_est=c1, last_update=t)
