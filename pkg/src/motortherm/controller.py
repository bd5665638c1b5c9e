"""Receding-horizon maximum-tension planner.

Each tick optimises a sequence of tension ceilings over ``n_control``
steps of ``dt_control`` so the predicted core temperature approaches and
holds ``c1_max``. The loss is the mean squared core-temperature error over
the predicted steps plus ``w_control`` times the mean squared tension; it
is minimised by projected gradient descent with the gradient obtained by
a reverse sweep through the Euler rollout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import ThermalParams, ThermalState


@dataclass(frozen=True)
class ControllerConfig:
    dt_control: float = 1.0  # s
    n_control: int = 30
    c1_max: float = 80.0  # degC
    w_control: float = 0.001
    beta: float = 30.0  # N
    f_min: float = 10.0  # N
    f_max: float = 300.0  # N
    iters_per_tick: int = 50
    loss_improvement_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.n_control < 2:
            raise ValueError("n_control must be >= 2")
        if not self.f_min < self.f_max:
            raise ValueError("f_min must be below f_max")
        for name in ("dt_control", "beta", "f_min", "iters_per_tick"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.w_control < 0:
            raise ValueError("w_control must be non-negative")


@dataclass(frozen=True)
class TensionPlan:
    f_limit: tuple  # N, one entry per control step
    created_at: float = 0.0
    loss: float = float("nan")
    iterations: int = 0

    @property
    def head(self) -> float:
        return self.f_limit[0]


def plan_loss_and_gradient(
    f_limit: Sequence[float], current: ThermalState, params: ThermalParams, cfg: ControllerConfig
) -> tuple:
    """Control loss and its gradient with respect to every plan entry."""
    a1, a2, a3, a4, amb = params.coefficients()
    dt = cfg.dt_control
    target = cfg.c1_max
    f = [float(v) for v in f_limit]
    n = len(f)
    m = n - 1

    c1s = [current.c1]
    c2s = [current.c2]
    c1 = current.c1
    c2 = current.c2
    for k in range(m):
        fk = f[k]
        diff = c1 - c2
        n1 = c1 + (a1 * fk * fk - diff / a2) * dt
        c2 = c2 + (diff / a3 - (c2 - amb) / a4) * dt
        c1 = n1
        c1s.append(c1)
        c2s.append(c2)

    tracking = 0.0
    for k in range(1, m + 1):
        r = c1s[k] - target
        tracking += r * r
    effort = 0.0
    for v in f:
        effort += v * v
    loss = tracking / m + cfg.w_control * effort / n

    j11 = 1.0 - dt / a2
    j12 = dt / a2
    j21 = dt / a3
    j22 = 1.0 - dt / a3 - dt / a4
    scale = 2.0 / m
    grad = [2.0 * cfg.w_control * v / n for v in f]
    lam1 = scale * (c1s[m] - target)
    lam2 = 0.0
    for k in range(m - 1, -1, -1):
        grad[k] += lam1 * dt * a1 * 2.0 * f[k]
        new1 = j11 * lam1 + j21 * lam2
        new2 = j12 * lam1 + j22 * lam2
        if k > 0:
            new1 += scale * (c1s[k] - target)
        lam1, lam2 = new1, new2
    return loss, np.array(grad)


def control_loss(plan, current: ThermalState, params: ThermalParams, cfg: ControllerConfig) -> float:
    f = plan.f_limit if isinstance(plan, TensionPlan) else plan
    return plan_loss_and_gradient(f, current, params, cfg)[0]


def plan_gradient(plan, current: ThermalState, params: ThermalParams, cfg: ControllerConfig) -> np.ndarray:
    f = plan.f_limit if isinstance(plan, TensionPlan) else plan
    return plan_loss_and_gradient(f, current, params, cfg)[1]


def warm_start(prev: Optional[TensionPlan], cfg: ControllerConfig) -> np.ndarray:
    """Previous plan shifted one step left with its last entry repeated, or all ``f_max``."""
    if prev is None:
        return np.full(cfg.n_control, cfg.f_max)
    f = np.asarray(prev.f_limit, dtype=float)
    if f.size != cfg.n_control:
        return np.full(cfg.n_control, cfg.f_max)
    return np.clip(np.append(f[1:], f[-1]), cfg.f_min, cfg.f_max)


def controller_tick(
    prev_plan: Optional[TensionPlan],
    current: ThermalState,
    params: ThermalParams,
    cfg: ControllerConfig,
    t: float = 0.0,
) -> TensionPlan:
    """Projected gradient descent from the warm start.

    A step is kept only if it does not raise the loss; the loop stops on
    the first non-improving step or once the improvement drops below
    ``loss_improvement_tol``.
    """
    f = warm_start(prev_plan, cfg)
    loss, grad = plan_loss_and_gradient(f, current, params, cfg)
    done = 0
    for _ in range(cfg.iters_per_tick):
        cand = np.clip(f - cfg.beta * grad, cfg.f_min, cfg.f_max)
        cand_loss, cand_grad = plan_loss_and_gradient(cand, current, params, cfg)
        gain = loss - cand_loss
        if gain < 0:
            break
        f, loss, grad = cand, cand_loss, cand_grad
        done += 1
        if gain < cfg.loss_improvement_tol:
            break
    return TensionPlan(f_limit=tuple(float(v) for v in f), created_at=t, loss=loss, iterations=done)


def sustainable_tension(params: ThermalParams, c1_max: float) -> float:
    """Constant tension whose steady state puts the core exactly at ``c1_max``."""
    a1, a2, a3, a4, amb = params.coefficients()
    rise = c1_max - amb
    if rise <= 0:
        return 0.0
    return float(np.sqrt(rise / (a1 * a2 * (1.0 + a4 / a3))))
