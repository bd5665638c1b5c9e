"""Anomaly flagging from drift of the learned parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .model import ThermalParams

NORMAL = "normal"
ANOMALY = "anomaly"


@dataclass(frozen=True)
class AnomalyConfig:
    d_detect: float = 1.0
    p_init: Optional[tuple] = None  # P1..P4 at arm time

    def __post_init__(self) -> None:
        if not self.d_detect > 0:
            raise ValueError("d_detect must be positive")

    @property
    def armed(self) -> bool:
        return self.p_init is not None


def anomaly_arm(params: ThermalParams, cfg: Optional[AnomalyConfig] = None) -> AnomalyConfig:
    """Freeze the current ``P1..P4`` as the reference."""
    cfg = cfg or AnomalyConfig()
    return replace(cfg, p_init=tuple(params.P[:4]))


def anomaly_score(params: ThermalParams, cfg: AnomalyConfig) -> float:
    """RMS deviation of ``P1..P4`` from the reference; ``P5`` is ignored."""
    if cfg.p_init is None:
        raise ValueError("anomaly reference is not armed")
    return math.sqrt(sum((p - q) ** 2 for p, q in zip(params.P[:4], cfg.p_init)) / 4.0)


def anomaly_check(params: ThermalParams, cfg: AnomalyConfig) -> str:
    return ANOMALY if anomaly_score(params, cfg) > cfg.d_detect else NORMAL


class AutoArm:
    """Arms once the batch loss has stayed below ``tolerance`` for ``k`` updates."""

    def __init__(self, tolerance: float = 0.05, k: int = 5) -> None:
        self.tolerance = tolerance
        self.k = k
        self.streak = 0

    def observe(self, loss: float) -> bool:
        self.streak = self.streak + 1 if loss < self.tolerance else 0
        return self.streak >= self.k


def parameter_deltas(params: ThermalParams, reference: Sequence[float]) -> list:
    return [p - q for p, q in zip(params.P[:4], reference)]
