import numpy as np
import pytest

from motortherm.controller import (
    ControllerConfig,
    TensionPlan,
    control_loss,
    controller_tick,
    plan_gradient,
    plan_loss_and_gradient,
    sustainable_tension,
    warm_start,
)
from motortherm.model import ThermalState, rollout
from oracles import control_fd, control_loss_mp

CFG = ControllerConfig()


def reference_loss(f, current, params, cfg):
    states = rollout(current, list(f[:-1]), params, cfg.dt_control)
    c1 = np.array([s.c1 for s in states])
    return float(np.mean((c1 - cfg.c1_max) ** 2) + cfg.w_control * np.mean(np.asarray(f) ** 2))


def test_loss_matches_reference(ec4):
    rng = np.random.default_rng(2)
    for _ in range(10):
        f = rng.uniform(10, 300, CFG.n_control)
        cur = ThermalState(rng.uniform(30, 90), rng.uniform(30, 70))
        params = ec4.with_p(rng.uniform(-0.5, 0.5, 5))
        loss = control_loss(f, cur, params, CFG)
        assert loss == pytest.approx(reference_loss(f, cur, params, CFG), rel=1e-12)
        assert loss == pytest.approx(float(control_loss_mp(list(f), cur, params, CFG)), rel=1e-12)


def test_loss_zero_when_holding_target(ec4):
    cfg = ControllerConfig(w_control=0.0, c1_max=30.0)
    assert control_loss(np.zeros(30), ThermalState(30, 30), ec4, cfg) == 0.0


def test_gradient_matches_finite_differences(ec4):
    rng = np.random.default_rng(4)
    for _ in range(20):
        f = rng.uniform(10, 300, CFG.n_control)
        cur = ThermalState(rng.uniform(30, 90), rng.uniform(30, 70))
        params = ec4.with_p(rng.uniform(-0.5, 0.5, 5))
        g = plan_gradient(f, cur, params, CFG)
        fd = np.array(control_fd(f, cur, params, CFG))
        assert np.all(np.abs(g - fd) <= np.maximum(1e-4 * np.abs(fd), 1e-10))


def test_effort_term_alone(ec4):
    f = np.linspace(20, 250, CFG.n_control)
    cur = ThermalState(40, 35)
    full = plan_gradient(f, cur, ec4, CFG)
    no_effort = plan_gradient(f, cur, ec4, ControllerConfig(w_control=0.0))
    assert np.allclose(full - no_effort, 2 * CFG.w_control * f / CFG.n_control, rtol=1e-10, atol=1e-15)
    assert no_effort[-1] == 0.0


def test_cold_state_wants_more_tension(ec4):
    f = np.full(CFG.n_control, 100.0)
    g = plan_gradient(f, ThermalState(30, 30), ec4, ControllerConfig(w_control=0.0))
    assert np.all(g <= 0)
    assert np.all(g[:-1] < 0)


def test_warm_start():
    assert np.array_equal(warm_start(None, CFG), np.full(30, 300.0))
    prev = TensionPlan(f_limit=tuple(float(v) for v in range(10, 40)))
    ws = warm_start(prev, CFG)
    assert ws[0] == 11.0 and ws[-2] == 39.0 and ws[-1] == 39.0


def test_cold_plan_stays_high(ec4):
    plan = controller_tick(None, ThermalState(30, 30), ec4, CFG)
    assert plan.head >= 290.0
    assert plan.loss <= control_loss(warm_start(None, CFG), ThermalState(30, 30), ec4, CFG)


def test_hot_plan_decreases_to_plateau(ec4):
    plan = None
    for _ in range(5):
        plan = controller_tick(plan, ThermalState(75, 75), ec4, CFG)
    f = np.array(plan.f_limit)
    assert f[0] > f[5] > f[10]
    assert abs(np.mean(f[5:20]) - sustainable_tension(ec4, 80.0)) < 20.0


def test_plans_are_clamped_and_monotone(ec4):
    rng = np.random.default_rng(9)
    plan = None
    for _ in range(30):
        cur = ThermalState(rng.uniform(30, 95), rng.uniform(30, 80))
        start = warm_start(plan, CFG)
        plan = controller_tick(plan, cur, ec4, CFG)
        assert all(CFG.f_min <= v <= CFG.f_max for v in plan.f_limit)
        assert plan.loss <= control_loss(start, cur, ec4, CFG)


def test_sustainable_tension(ec4):
    assert sustainable_tension(ec4, 80.0) == pytest.approx(np.sqrt(50 / (2.97e-4 * 11.5)), rel=1e-9)
    assert sustainable_tension(ec4, 20.0) == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        ControllerConfig(f_min=300, f_max=10)
    with pytest.raises(ValueError):
        ControllerConfig(n_control=1)


def test_loss_and_gradient_same_call(ec4):
    f = np.full(30, 150.0)
    loss, grad = plan_loss_and_gradient(f, ThermalState(50, 45), ec4, CFG)
    assert loss == control_loss(TensionPlan(tuple(f)), ThermalState(50, 45), ec4, CFG)
    assert grad.shape == (30,)
