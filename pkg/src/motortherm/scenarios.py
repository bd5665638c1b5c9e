"""Scenario orchestration on a single simulated clock.

Every scenario returns a JSON-serialisable report and, when an output
directory is given, writes its artifacts there:

* ``trace*.csv``     -- the standard per-``trace_dt`` trace
* ``params.jsonl``   -- one parameter snapshot per learner update
* ``events.jsonl``   -- anomaly verdict transitions
* ``report.json``    -- summary metrics
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from functools import reduce
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from .anomaly import ANOMALY, AnomalyConfig
from .controller import TensionPlan, controller_tick, sustainable_tension
from .config import ScenarioConfig, UsageError
from .learner import params_from_snapshot, snapshot_json
from .limiter import LimiterState, apply_offset, limiter_tick
from .model import ThermalParams, ThermalState, params_from_spec
from .pipeline import MotorPipeline, PipelineConfig
from .sim import (
    ElasticMuscle,
    FaultMode,
    Plant,
    PlantConfig,
    elastic_tension,
    make_rng,
    perturbed_params,
    random_tension_walk,
    rmse,
)

TRACE_COLUMNS = (
    "time_s",
    "f_cmd",
    "f_true",
    "f_obs",
    "c1_true",
    "c2_true",
    "c2_obs",
    "c1_est",
    "f_limit",
    "dl",
    "g",
    "verdict",
)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return repr(float(value))


class Artifacts:
    """In-memory artifact set; ``save`` writes it out byte-for-byte."""

    def __init__(self) -> None:
        self.files: dict = {}

    def csv(self, name: str, header: Iterable[str]) -> "CsvSink":
        sink = CsvSink(header)
        self.files[name] = sink
        return sink

    def lines(self, name: str) -> list:
        return self.files.setdefault(name, [])

    def text(self, name: str) -> str:
        value = self.files[name]
        if isinstance(value, CsvSink):
            return value.getvalue()
        return "".join(line + "\n" for line in value)

    def save(self, out: Path) -> None:
        out.mkdir(parents=True, exist_ok=True)
        for name in self.files:
            (out / name).write_text(self.text(name), encoding="utf-8", newline="\n")


class CsvSink:
    def __init__(self, header: Iterable[str]) -> None:
        self._buf = io.StringIO()
        self._writer = csv.writer(self._buf, lineterminator="\n")
        self._writer.writerow(header)

    def row(self, values: Iterable) -> None:
        self._writer.writerow([fmt(v) for v in values])

    def getvalue(self) -> str:
        return self._buf.getvalue()


def _ticks(period: float, base: float) -> int:
    n = round(period / base)
    if n < 1 or abs(n * base - period) > 1e-9 * max(1.0, period):
        raise UsageError(f"period {period} is not a multiple of the base step {base}")
    return n


def _fault_mode(settings) -> FaultMode:
    return FaultMode(settings.kind, float(settings.value))


def _pipeline_config(cfg: ScenarioConfig, arm: Optional[str] = None, learn: bool = True) -> PipelineConfig:
    return PipelineConfig(
        estimator=cfg.estimator,
        learner=cfg.learner,
        anomaly=AnomalyConfig(d_detect=cfg.anomaly.d_detect),
        learn=learn,
        arm=arm or cfg.anomaly.arm,
        arm_tolerance=cfg.anomaly.arm_tolerance,
        arm_k=cfg.anomaly.arm_k,
    )


def default_model(cfg: ScenarioConfig) -> ThermalParams:
    return params_from_spec(cfg.motor_spec(), cfg.ambient)


@dataclass
class LearningRun:
    pipeline: MotorPipeline
    p_sim: tuple
    rmse_series: list = field(default_factory=list)  # (t, rmse P1..P5, rmse P1..P4)
    first_anomaly_t: Optional[float] = None
    events: list = field(default_factory=list)


def run_learning(
    cfg: ScenarioConfig,
    p_sim: Optional[tuple] = None,
    seed: Optional[int] = None,
    true_c1_teacher: bool = False,
    artifacts: Optional[Artifacts] = None,
    record_every: float = 60.0,
) -> LearningRun:
    """Random-walk excitation of a simulated plant while the model learns online."""
    seed = cfg.seed if seed is None else seed
    p_sim = tuple(cfg.plant.p_sim if p_sim is None else p_sim)
    dt = cfg.plant.dt_plant
    plant = Plant(
        PlantConfig(
            spec=cfg.motor_spec(),
            p_sim=p_sim,
            ambient=cfg.ambient,
            dt_plant=dt,
            seed=seed,
            fault=_fault_mode(cfg.plant.fault),
        ),
        c1=cfg.plant.initial_c1,
        c2=cfg.plant.initial_c2,
    )
    rng = make_rng(seed)
    pipe = MotorPipeline(default_model(cfg), _pipeline_config(cfg), motor_id="m0")
    run = LearningRun(pipeline=pipe, p_sim=p_sim)

    walk_every = _ticks(cfg.learner.dt_data, dt)
    trace_every = _ticks(cfg.trace_dt, dt)
    record_ticks = _ticks(record_every, dt)
    n = round(cfg.duration / dt)

    trace = artifacts.csv("trace.csv", TRACE_COLUMNS) if artifacts is not None else None
    telemetry = artifacts.csv("telemetry.csv", ("t", "c2", "f")) if artifacts is not None and cfg.telemetry else None
    snapshots = artifacts.lines("params.jsonl") if artifacts is not None else None

    w = cfg.walk
    f = w.f_init
    verdict = pipe.verdict
    for k in range(n + 1):
        t = k * dt
        if k % walk_every == 0:
            f = random_tension_walk(rng, f, w.lo, w.hi, w.step)
        if k % record_ticks == 0:
            run.rmse_series.append((t, rmse(pipe.params.P, p_sim), rmse(pipe.params.P[:4], p_sim[:4])))
        obs = plant.observe(f)
        event = pipe.observe(t, obs.c2, obs.f, plant.c1 if true_c1_teacher else None)
        if event is not None:
            if snapshots is not None:
                snapshots.append(snapshot_json(event.params, pipe.motor_id, t, loss=event.loss, g=event.g))
            if event.verdict is not None and event.verdict != verdict:
                run.events.append({"timestamp": t, "motor_id": pipe.motor_id, "g": event.g, "verdict": event.verdict})
                verdict = event.verdict
            if event.verdict == ANOMALY and run.first_anomaly_t is None:
                run.first_anomaly_t = t
        if telemetry is not None:
            telemetry.row((t, obs.c2, obs.f))
        if trace is not None and k % trace_every == 0:
            trace.row(
                (t, f, plant.true_tension(f), obs.f, plant.c1, plant.c2, obs.c2, pipe.c1_est, None, None, pipe.g, pipe.verdict)
            )
        if k < n:
            plant.step(f)
    if artifacts is not None:
        artifacts.lines("events.jsonl").extend(json.dumps(e, sort_keys=True) for e in run.events)
    return run


def _checkpoints(series: list, every: float) -> list:
    out = []
    for t, r5, r4 in series:
        if abs(t / every - round(t / every)) < 1e-9:
            out.append({"t": t, "rmse": r5, "rmse_p1_p4": r4})
    return out


def sim_learn(cfg: ScenarioConfig, artifacts: Optional[Artifacts] = None) -> dict:
    run = run_learning(cfg, artifacts=artifacts)
    pipe = run.pipeline
    if artifacts is not None:
        artifacts.lines("final_params.json").append(
            snapshot_json(pipe.params, pipe.motor_id, cfg.duration, p_sim=list(run.p_sim))
        )
    return {
        "scenario": "sim-learn",
        "seed": cfg.seed,
        "p_sim": list(run.p_sim),
        "final_P": list(pipe.params.P),
        "initial_rmse": run.rmse_series[0][1],
        "final_rmse": rmse(pipe.params.P, run.p_sim),
        "final_rmse_p1_p4": rmse(pipe.params.P[:4], run.p_sim[:4]),
        "first_update_t": pipe.first_update_t,
        "n_updates": len(pipe.updates),
        "rmse_series": [list(r) for r in run.rmse_series],
        "checkpoints": _checkpoints(run.rmse_series, 600.0),
        "anomaly_events": run.events,
    }


def sim_quant(cfg: ScenarioConfig, artifacts: Optional[Artifacts] = None, progress: Optional[Callable] = None) -> dict:
    """Learning from several randomly perturbed plants, with estimated vs true core teacher."""
    q = cfg.quant
    rng = make_rng(cfg.seed)
    plants = [tuple(float(v) for v in perturbed_params(rng, q.target_rmse)) for _ in range(q.n_plants)]
    series = {"estimated": [], "true": []}
    for i, p_sim in enumerate(plants):
        for variant, teacher in (("estimated", False), ("true", True)):
            run = run_learning(cfg, p_sim=p_sim, seed=cfg.seed + 1 + i, true_c1_teacher=teacher, record_every=q.checkpoint)
            series[variant].append([r[1] for r in run.rmse_series])
            if progress is not None:
                progress(i, variant)
    times = [k * q.checkpoint for k in range(len(series["estimated"][0]))]
    table = []
    for j, t in enumerate(times):
        row = {"t": t}
        for variant in series:
            vals = np.array([s[j] for s in series[variant]])
            row[f"{variant}_mean"] = float(vals.mean())
            row[f"{variant}_std"] = float(vals.std())
        table.append(row)
    if artifacts is not None:
        sink = artifacts.csv("quant.csv", ("t", "estimated_mean", "estimated_std", "true_mean", "true_std"))
        for row in table:
            sink.row((row["t"], row["estimated_mean"], row["estimated_std"], row["true_mean"], row["true_std"]))
    return {
        "scenario": "sim-quant",
        "seed": cfg.seed,
        "p_sims": [list(p) for p in plants],
        "checkpoints": table,
        "per_plant": series,
    }


def sim_fault(cfg: ScenarioConfig, artifacts: Optional[Artifacts] = None) -> dict:
    run = run_learning(cfg, artifacts=artifacts)
    pipe = run.pipeline
    onset = pipe.first_update_t
    delay = None
    if run.first_anomaly_t is not None and onset is not None:
        delay = run.first_anomaly_t - onset
    ref = pipe.anomaly.p_init
    return {
        "scenario": "sim-fault",
        "seed": cfg.seed,
        "fault": {"kind": cfg.plant.fault.kind, "value": cfg.plant.fault.value},
        "learning_onset_t": onset,
        "first_anomaly_t": run.first_anomaly_t,
        "detection_delay": delay,
        "final_g": pipe.g,
        "final_P": list(pipe.params.P),
        "param_deltas": None if ref is None else [p - q for p, q in zip(pipe.params.P[:4], ref)],
        "g_series": [[e.t, e.g] for e in pipe.updates],
        "anomaly_events": run.events,
    }


def control_model(cfg: ScenarioConfig) -> ThermalParams:
    """Model used by the thermal controller, per ``cfg.control``."""
    c = cfg.control
    if c.params_path:
        try:
            doc = json.loads(Path(c.params_path).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{c.params_path}: invalid JSON ({exc})") from exc
        return params_from_snapshot(doc)
    if c.model == "default":
        return default_model(cfg)
    learn_cfg = replace(cfg, duration=c.learn_duration, plant=replace(cfg.plant, initial_c1=30.0, initial_c2=30.0))
    return run_learning(learn_cfg).pipeline.params


@dataclass
class ControlRun:
    max_c1: float
    t_reach: Optional[float]
    heads: list  # (t, f_limit head)
    c1_true: list  # (t, c1) at trace cadence


def run_thermal_control(
    cfg: ScenarioConfig,
    model: ThermalParams,
    initial_temp: float,
    p_sim: Optional[tuple] = None,
    artifacts: Optional[Artifacts] = None,
    suffix: str = "",
    reach_margin: float = 2.0,
) -> ControlRun:
    """Drive the plant with the head of the receding-horizon plan."""
    p_sim = tuple(cfg.plant.p_sim if p_sim is None else p_sim)
    dt = cfg.plant.dt_plant
    ctl = cfg.controller
    plant = Plant(
        PlantConfig(spec=cfg.motor_spec(), p_sim=p_sim, ambient=cfg.ambient, dt_plant=dt, seed=cfg.seed),
        c1=initial_temp,
        c2=initial_temp,
    )
    pipe = MotorPipeline(model, _pipeline_config(cfg, arm="never", learn=False))
    ctl_every = _ticks(ctl.dt_control, dt)
    trace_every = _ticks(cfg.trace_dt, dt)
    n = round(cfg.duration / dt)
    trace = artifacts.csv(f"trace{suffix}.csv", TRACE_COLUMNS) if artifacts is not None else None
    plans = (
        artifacts.csv(f"plans{suffix}.csv", ["time_s"] + [f"f{j}" for j in range(ctl.n_control)])
        if artifacts is not None
        else None
    )
    plan: Optional[TensionPlan] = None
    result = ControlRun(max_c1=plant.c1, t_reach=None, heads=[], c1_true=[])
    for k in range(n + 1):
        t = k * dt
        f = plan.head if plan is not None else 0.0
        obs = plant.observe(f)
        pipe.observe(t, obs.c2, obs.f)
        if k % ctl_every == 0:
            plan = controller_tick(plan, ThermalState(pipe.c1_est, obs.c2), pipe.params, ctl, t)
            f = plan.head
            result.heads.append((t, f))
            if plans is not None:
                plans.row((t,) + plan.f_limit)
        if k % trace_every == 0:
            result.c1_true.append((t, plant.c1))
            if trace is not None:
                trace.row((t, f, f, f, plant.c1, plant.c2, obs.c2, pipe.c1_est, plan.head, None, None, None))
        if k < n:
            plant.step(f)
            result.max_c1 = max(result.max_c1, plant.c1)
            if result.t_reach is None and plant.c1 >= ctl.c1_max - reach_margin:
                result.t_reach = t + dt
    return result


def sim_control(cfg: ScenarioConfig, artifacts: Optional[Artifacts] = None, model: Optional[ThermalParams] = None) -> dict:
    model = model or control_model(cfg)
    runs = []
    for temp in cfg.control.initial_temps:
        res = run_thermal_control(cfg, model, temp, artifacts=artifacts, suffix=f"_T{temp:g}")
        heads = [h for _, h in res.heads]
        runs.append(
            {
                "initial_temp": temp,
                "max_c1": res.max_c1,
                "t_reach": res.t_reach,
                "final_f_limit": heads[-1],
                "f_limit_first": heads[0],
            }
        )
    return {
        "scenario": "sim-control",
        "seed": cfg.seed,
        "model_P": list(model.P),
        "p_sim": list(cfg.plant.p_sim),
        "c1_max": cfg.controller.c1_max,
        "sustainable_tension_model": sustainable_tension(model, cfg.controller.c1_max),
        "runs": runs,
    }


def _base_step(*periods: float) -> float:
    """Largest step dividing every period (periods taken to microsecond precision)."""
    micro = [int(round(p * 1_000_000)) for p in periods]
    return reduce(math.gcd, micro) / 1_000_000


@dataclass
class ClosedLoopRun:
    max_c1: float
    samples: list  # (t, f_meas, f_limit, dl, c1_true, c1_est)
    min_dl: float


def run_closed_loop(
    cfg: ScenarioConfig,
    model: Optional[ThermalParams] = None,
    f_limit_schedule: Optional[Callable[[float], float]] = None,
    artifacts: Optional[Artifacts] = None,
    sample_dt: Optional[float] = None,
) -> ClosedLoopRun:
    """Length-controlled muscle against a fixed endpoint, with the limiter in the loop.

    Periods: limiter ``limiter.period``, plant and estimator ``dt_plant``,
    controller ``dt_control``. A ``f_limit_schedule`` replaces the
    controller (used to exercise the limiter alone).
    """
    dt_plant = cfg.plant.dt_plant
    lim = cfg.limiter
    ctl = cfg.controller
    base = _base_step(dt_plant, lim.period, ctl.dt_control, cfg.trace_dt)
    plant_every = _ticks(dt_plant, base)
    lim_every = _ticks(lim.period, base)
    ctl_every = _ticks(ctl.dt_control, base)
    trace_every = _ticks(cfg.trace_dt, base)
    sample_every = _ticks(sample_dt, base) if sample_dt else trace_every
    n = round(cfg.duration / base)

    model = model or default_model(cfg)
    plant = Plant(
        PlantConfig(spec=cfg.motor_spec(), p_sim=tuple(cfg.plant.p_sim), ambient=cfg.ambient, dt_plant=dt_plant, seed=cfg.seed),
        c1=cfg.plant.initial_c1,
        c2=cfg.plant.initial_c2,
    )
    pipe = MotorPipeline(model, _pipeline_config(cfg, learn=False, arm="never"))
    muscle = ElasticMuscle(stiffness=cfg.muscle.stiffness)
    l_ref = cfg.muscle.l_ref
    state = LimiterState()
    plan: Optional[TensionPlan] = None
    f_limit = ctl.f_max
    trace = artifacts.csv("trace.csv", TRACE_COLUMNS) if artifacts is not None else None
    f_meas = elastic_tension(muscle, apply_offset(l_ref, state))
    result = ClosedLoopRun(max_c1=plant.c1, samples=[], min_dl=0.0)
    for k in range(n + 1):
        t = k * base
        if k % plant_every == 0:
            obs = plant.observe(f_meas)
            pipe.observe(t, obs.c2, obs.f)
        if f_limit_schedule is not None:
            f_limit = f_limit_schedule(t)
        elif k % ctl_every == 0:
            plan = controller_tick(plan, ThermalState(pipe.c1_est, obs.c2), pipe.params, ctl, t)
            f_limit = plan.head
        if k % lim_every == 0:
            state = limiter_tick(state, f_meas, f_limit, lim)
            result.min_dl = min(result.min_dl, state.dl)
            f_meas = elastic_tension(muscle, apply_offset(l_ref, state))
        if k % sample_every == 0:
            result.samples.append((t, f_meas, f_limit, state.dl, plant.c1, pipe.c1_est))
        if trace is not None and k % trace_every == 0:
            trace.row((t, f_meas, f_meas, f_meas, plant.c1, plant.c2, obs.c2, pipe.c1_est, f_limit, state.dl, None, None))
        if k < n and k % plant_every == 0:
            plant.step(f_meas)
            result.max_c1 = max(result.max_c1, plant.c1)
    return result


def closed_loop(cfg: ScenarioConfig, artifacts: Optional[Artifacts] = None) -> dict:
    model = control_model(cfg) if cfg.control.params_path else default_model(cfg)
    res = run_closed_loop(cfg, model=model, artifacts=artifacts)
    tail = [s for s in res.samples if s[0] >= 0.75 * cfg.duration]
    f_tail = [s[1] for s in tail]
    return {
        "scenario": "closed-loop",
        "seed": cfg.seed,
        "max_c1": res.max_c1,
        "mean_f_tail": float(np.mean(f_tail)),
        "mean_f_limit_tail": float(np.mean([s[2] for s in tail])),
        "final_dl": res.samples[-1][3],
        "sustainable_tension_model": sustainable_tension(model, cfg.controller.c1_max),
    }
