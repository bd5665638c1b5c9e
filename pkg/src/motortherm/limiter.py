"""Tension ceiling for length-controlled muscles.

A non-negative elongation offset ``dl`` (mm) is added to the commanded
muscle length. It grows while the measured tension exceeds the ceiling
and relaxes back toward zero otherwise, with per-tick changes bounded
proportionally to the tension error.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LimiterConfig:
    dl_minus: float = 0.001  # mm per N of error per tick
    dl_plus: float = 0.003  # mm per N of error per tick
    d_gain: float = 2.0  # mm per N, caps the elongation at d_gain * error
    period: float = 0.008  # s

    def __post_init__(self) -> None:
        for name in ("dl_minus", "dl_plus", "d_gain", "period"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class LimiterState:
    dl: float = 0.0  # mm, >= 0


def limiter_tick(state: LimiterState, f_meas: float, f_limit: float, cfg: LimiterConfig) -> LimiterState:
    d = abs(f_meas - f_limit)
    dl = state.dl
    if f_meas > f_limit:
        dl = dl + min(cfg.d_gain * d - dl, cfg.dl_plus * d)
    else:
        dl = dl + max(0.0 - dl, -cfg.dl_minus * d)
    return LimiterState(dl=dl)


def apply_offset(l_ref: float, state: LimiterState) -> float:
    """Length command actually sent: ``l_ref + dl`` (larger is looser)."""
    return l_ref + state.dl
