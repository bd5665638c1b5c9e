import numpy as np
import pytest

from motortherm.model import EC4POLE_22_90W, ThermalState, params_from_spec, step
from motortherm.sim import (
    ElasticMuscle,
    FaultMode,
    Plant,
    PlantConfig,
    elastic_tension,
    make_rng,
    perturbed_params,
    plant_step,
    random_tension_walk,
    rmse,
)


class FixedDraw:
    def __init__(self, value):
        self.value = value

    def uniform(self, lo, hi):
        return self.value


def test_walk_clamps():
    assert random_tension_walk(FixedDraw(-50.0), 10.0) == 10.0
    assert random_tension_walk(FixedDraw(50.0), 200.0) == 200.0
    assert random_tension_walk(FixedDraw(12.5), 100.0) == 112.5


def test_walk_drift_is_small():
    rng = make_rng(1)
    draws = np.array([random_tension_walk(rng, 100.0) for _ in range(100_000)])
    assert draws.min() >= 10.0 and draws.max() <= 200.0
    assert abs(draws.mean() - 100.0) < 2.0


def test_perturbed_params():
    for seed in range(5):
        p = perturbed_params(make_rng(seed), 0.5)
        assert np.sqrt(np.mean(p**2)) == pytest.approx(0.5, abs=1e-12)
    assert not np.array_equal(perturbed_params(make_rng(1)), perturbed_params(make_rng(2)))
    assert np.array_equal(perturbed_params(make_rng(1), 0.0), np.zeros(5))


def test_plant_matches_model_step():
    plant = Plant(PlantConfig())
    (c1, c2), obs = plant_step(plant, 200.0)
    expect = step(ThermalState(30, 30), 200.0, params_from_spec(EC4POLE_22_90W, 30.0), 0.02)
    assert (c1, c2) == (expect.c1, expect.c2)
    assert obs.c2 == c2 and obs.f == 200.0


def test_stuck_sensor():
    plant = Plant(PlantConfig(fault=FaultMode.stuck_sensor(30.0)))
    for _ in range(3000):
        obs = plant.step(150.0)
    assert plant.c2 > 31.0
    assert obs.c2 == 30.0


def test_stuck_tension():
    plant = Plant(PlantConfig(fault=FaultMode.stuck_tension(200.0)))
    ref = Plant(PlantConfig())
    for _ in range(100):
        obs = plant.step(50.0)
        ref.step(200.0)
    assert obs.f == 50.0
    assert plant.f_true == 200.0
    assert (plant.c1, plant.c2) == (ref.c1, ref.c2)


def test_unknown_fault():
    with pytest.raises(ValueError):
        FaultMode("melted")


def test_elastic_muscle():
    m = ElasticMuscle(12.5)
    assert elastic_tension(m, 0.0) == 0.0
    assert elastic_tension(m, -16.0) == 200.0
    assert elastic_tension(m, 5.0) == 0.0


def test_rmse():
    assert rmse([1, 1, 1, 1], [0, 0, 0, 0]) == 1.0
