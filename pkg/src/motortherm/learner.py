"""Online identification of the learnable offsets ``P1..P5``.

Telemetry is cut into windows of ``n_seq`` samples spaced ``dt_data``
apart. Each window seeds the model with its first (estimated core,
measured housing) pair, rolls both equations forward with the recorded
tensions and scores the predicted housing temperature against the
measured one. The gradient of that score is obtained by a reverse sweep
over the Euler recurrence; batches of windows are averaged, clipped and
applied as a single gradient step.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Optional, Sequence

import numpy as np

from .model import ThermalParams

SNAPSHOT_SCHEMA = "motortherm.params/1"


class NotReadyError(RuntimeError):
    """The batch buffer does not hold ``n_batch`` windows yet."""


@dataclass(frozen=True)
class LearnerConfig:
    dt_data: float = 1.0  # s
    n_seq: int = 30
    n_batch: int = 10
    alpha: float = 0.02
    d_clip: float = 5.0
    # samples between successive window starts; n_seq gives disjoint windows
    window_stride: int = 10

    def __post_init__(self) -> None:
        if self.n_seq < 2:
            raise ValueError("n_seq must be >= 2")
        if self.n_batch < 1:
            raise ValueError("n_batch must be >= 1")
        if not (self.alpha > 0 and self.d_clip > 0 and self.dt_data > 0):
            raise ValueError("alpha, d_clip and dt_data must be positive")
        if not 1 <= self.window_stride <= self.n_seq:
            raise ValueError("window_stride must lie in [1, n_seq]")


@dataclass(frozen=True)
class SampleWindow:
    c1: tuple  # estimated core temperature, degC
    c2: tuple  # measured housing temperature, degC
    f: tuple  # measured tension, N
    start_time: float = 0.0

    def __post_init__(self) -> None:
        if not (len(self.c1) == len(self.c2) == len(self.f)):
            raise ValueError("window sequences must share one length")
        if len(self.c2) < 2:
            raise ValueError("a window needs at least two samples")

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for seq in (self.c1, self.c2, self.f) for v in seq)


def window_loss(window: SampleWindow, params: ThermalParams, dt_data: float) -> float:
    """Mean squared housing-temperature error over the predicted steps."""
    a1, a2, a3, a4, amb = params.coefficients()
    c1 = window.c1[0]
    c2 = window.c2[0]
    f = window.f
    target = window.c2
    m = len(target) - 1
    total = 0.0
    for k in range(m):
        fk = f[k]
        diff = c1 - c2
        n1 = c1 + (a1 * fk * fk - diff / a2) * dt_data
        c2 = c2 + (diff / a3 - (c2 - amb) / a4) * dt_data
        c1 = n1
        r = c2 - target[k + 1]
        total += r * r
    return total / m


def window_loss_and_gradient(
    window: SampleWindow, params: ThermalParams, dt_data: float
) -> tuple:
    """Loss and its gradient with respect to ``P1..P5`` (reverse-mode sweep).

    Forward: ``x_{k+1} = x_k + h(x_k, f_k) dt`` for k = 0..m-1 with
    ``x = (c1, c2)``. Backward: the adjoint ``lam_k = dL/dx_k`` obeys
    ``lam_k = J_k^T lam_{k+1} + dL_direct/dx_k``, and every step adds
    ``lam_{k+1} . dx_{k+1}/dP`` to the parameter gradient.
    """
    a1, a2, a3, a4, amb = params.coefficients()
    w5 = params.W[4]
    dt = dt_data
    f = window.f
    target = window.c2
    m = len(target) - 1

    c1s = [window.c1[0]]
    c2s = [window.c2[0]]
    c1 = c1s[0]
    c2 = c2s[0]
    for k in range(m):
        fk = f[k]
        diff = c1 - c2
        n1 = c1 + (a1 * fk * fk - diff / a2) * dt
        c2 = c2 + (diff / a3 - (c2 - amb) / a4) * dt
        c1 = n1
        c1s.append(c1)
        c2s.append(c2)

    total = 0.0
    for k in range(1, m + 1):
        r = c2s[k] - target[k]
        total += r * r
    loss = total / m

    # Jacobian entries are state independent.
    j11 = 1.0 - dt / a2
    j12 = dt / a2
    j21 = dt / a3
    j22 = 1.0 - dt / a3 - dt / a4
    scale = 2.0 / m

    g1 = g2 = g3 = g4 = g5 = 0.0
    lam1 = 0.0
    lam2 = scale * (c2s[m] - target[m])
    for k in range(m - 1, -1, -1):
        c1k = c1s[k]
        c2k = c2s[k]
        fk = f[k]
        diff = c1k - c2k
        g1 += lam1 * dt * a1 * fk * fk
        g2 += lam1 * dt * diff / a2
        g3 -= lam2 * dt * diff / a3
        g4 += lam2 * dt * (c2k - amb) / a4
        g5 += lam2 * dt * w5 / a4
        new1 = j11 * lam1 + j21 * lam2
        new2 = j12 * lam1 + j22 * lam2
        if k > 0:
            new2 += scale * (c2k - target[k])
        lam1, lam2 = new1, new2
    return loss, np.array([g1, g2, g3, g4, g5])


def window_gradient(window: SampleWindow, params: ThermalParams, dt_data: float) -> np.ndarray:
    return window_loss_and_gradient(window, params, dt_data)[1]


def clip_by_norm(grad: np.ndarray, max_norm: float) -> np.ndarray:
    norm = float(np.linalg.norm(grad))
    if norm > max_norm:
        return grad * (max_norm / norm)
    return grad


@dataclass
class BatchBuffer:
    capacity: int
    windows: Deque[SampleWindow] = field(default_factory=deque)

    def __len__(self) -> int:
        return len(self.windows)

    @property
    def full(self) -> bool:
        return len(self.windows) >= self.capacity


def learner_push(buffer: BatchBuffer, window: SampleWindow) -> tuple:
    """Append ``window``; returns ``(buffer, update_ready)``.

    Windows holding non-finite samples are dropped.
    """
    if window.is_finite():
        if buffer.full:
            buffer.windows.popleft()
        buffer.windows.append(window)
    return buffer, buffer.full


@dataclass(frozen=True)
class UpdateResult:
    params: ThermalParams
    mean_loss: float
    grad: np.ndarray  # averaged, before clipping
    clipped: bool


def learner_update(
    buffer: BatchBuffer, params: ThermalParams, cfg: LearnerConfig
) -> UpdateResult:
    """One clipped gradient step on the batch average; evicts the oldest window."""
    if not buffer.full:
        raise NotReadyError(f"buffer holds {len(buffer)} of {buffer.capacity} windows")
    grad = np.zeros(5)
    loss = 0.0
    for window in buffer.windows:
        lw, gw = window_loss_and_gradient(window, params, cfg.dt_data)
        loss += lw
        grad += gw
    n = len(buffer.windows)
    grad /= n
    loss /= n
    step = clip_by_norm(grad, cfg.d_clip)
    new_p = params.p - cfg.alpha * step
    buffer.windows.popleft()
    return UpdateResult(
        params=params.with_p(new_p),
        mean_loss=loss,
        grad=grad,
        clipped=bool(np.linalg.norm(grad) > cfg.d_clip),
    )


class WindowAccumulator:
    """Collects samples at ``dt_data`` spacing and emits complete windows.

    With ``window_stride == n_seq`` the windows are disjoint; smaller
    strides yield overlapping windows sharing ``n_seq - stride`` samples.
    """

    def __init__(self, cfg: LearnerConfig) -> None:
        self.cfg = cfg
        n = cfg.n_seq
        self._c1: Deque[float] = deque(maxlen=n)
        self._c2: Deque[float] = deque(maxlen=n)
        self._f: Deque[float] = deque(maxlen=n)
        self._t: Deque[float] = deque(maxlen=n)
        self._count = 0

    def add(self, t: float, c1: float, c2: float, f: float) -> Optional[SampleWindow]:
        self._c1.append(c1)
        self._c2.append(c2)
        self._f.append(f)
        self._t.append(t)
        self._count += 1
        start = self._count - self.cfg.n_seq
        if start < 0 or start % self.cfg.window_stride:
            return None
        return SampleWindow(
            c1=tuple(self._c1), c2=tuple(self._c2), f=tuple(self._f), start_time=self._t[0]
        )


def snapshot_json(
    params: ThermalParams, motor_id: str, timestamp: float, **extra
) -> str:
    doc = {
        "schema": SNAPSHOT_SCHEMA,
        "motor_id": motor_id,
        "timestamp": timestamp,
        "W": list(params.W),
        "P": list(params.P),
    }
    doc.update(extra)
    return json.dumps(doc, sort_keys=True)


def params_from_snapshot(doc: dict) -> ThermalParams:
    return ThermalParams(W=tuple(doc["W"]), P=tuple(doc["P"]))
