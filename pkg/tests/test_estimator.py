import math

import pytest

from motortherm.estimator import (
    EstimatorConfig,
    EstimatorState,
    MeasurementError,
    estimator_advance,
    estimator_init,
    estimator_tick,
)
from motortherm.model import EC4POLE_22_90W
from motortherm.sim import Plant, PlantConfig

CFG = EstimatorConfig()


def test_tick_examples(ec4):
    assert estimator_tick(EstimatorState(30.0), 30.0, 0.0, ec4, CFG).c1_est == 30.0
    assert estimator_tick(EstimatorState(30.0), 30.0, 200.0, ec4, CFG).c1_est == pytest.approx(30.11314, abs=5e-6)
    assert estimator_tick(EstimatorState(80.0), 40.0, 0.0, ec4, CFG).c1_est == pytest.approx(79.6825, abs=1e-4)


@pytest.mark.parametrize("c2, f", [(math.nan, 10.0), (30.0, math.inf), (30.0, -1.0)])
def test_bad_measurement_rejected(ec4, c2, f):
    state = EstimatorState(42.0)
    with pytest.raises(MeasurementError):
        estimator_tick(state, c2, f, ec4, CFG)
    assert state.c1_est == 42.0


def test_init_policies():
    assert estimator_init(30.0, CFG).c1_est == 30.0
    assert estimator_init(33.0, EstimatorConfig(fixed_ambient=25.0)).c1_est == 25.0
    with pytest.raises(MeasurementError):
        estimator_init(math.nan, CFG)


def test_housing_parameters_do_not_matter(ec4):
    state = EstimatorState(55.0)
    base = estimator_tick(state, 41.0, 120.0, ec4, CFG)
    other = ec4.with_p([0.0, 0.0, 0.7, -0.9, 0.4])
    assert estimator_tick(state, 41.0, 120.0, other, CFG) == base


def test_advance_substeps_a_gap(ec4):
    state = EstimatorState(50.0, last_update=1.0)
    out = estimator_advance(state, 1.05, 40.0, 80.0, ec4, CFG)
    # 0.05 s gap -> three sub-steps of 1/60 s
    c1 = 50.0
    for _ in range(3):
        c1 = estimator_tick(EstimatorState(c1), 40.0, 80.0, ec4, CFG, dt=0.05 / 3).c1_est
    assert out.c1_est == pytest.approx(c1, rel=1e-14)
    assert out.last_update == 1.05
    exact = estimator_advance(state, 1.02, 40.0, 80.0, ec4, CFG)
    assert exact.c1_est == estimator_tick(state, 40.0, 80.0, ec4, CFG).c1_est
    assert estimator_advance(state, 1.0, 40.0, 80.0, ec4, CFG) is state


def test_tracks_plant_from_wrong_start():
    plant = Plant(PlantConfig(spec=EC4POLE_22_90W))
    params = plant.params
    state = estimator_init(40.0, EstimatorConfig(fixed_ambient=40.0))
    for _ in range(30000):
        obs = plant.observe(100.0)
        state = estimator_tick(state, obs.c2, obs.f, params, CFG)
        plant.step(100.0)
    assert abs(state.c1_est - plant.c1) < 0.5
