import pytest

from motortherm.anomaly import NORMAL
from motortherm.learner import LearnerConfig
from motortherm.pipeline import MotorPipeline, PipelineConfig


def small(**kw):
    return PipelineConfig(learner=LearnerConfig(n_seq=5, n_batch=2, window_stride=5), **kw)


def feed(pipe, times, c2=30.0, f=0.0):
    return [pipe.observe(t, c2, f) for t in times]


def test_samples_on_the_data_grid(ec4):
    pipe = MotorPipeline(ec4, small(arm="never"))
    # irregular timestamps; one sample per whole second
    times = [0.0, 0.3, 0.99, 1.0, 1.7, 2.0000000001, 3.5, 4.0, 5.2, 6.0, 7.0, 8.0, 9.0, 9.9]
    events = feed(pipe, times)
    assert pipe._n_samples == 10
    assert sum(e is not None for e in events) == 1
    assert pipe.first_update_t == 9.0


def test_equilibrium_data_keeps_params(ec4):
    pipe = MotorPipeline(ec4, small(arm="start"))
    feed(pipe, [float(t) for t in range(40)])
    assert len(pipe.updates) == 7
    assert pipe.params == ec4
    assert pipe.g == 0.0 and pipe.verdict == NORMAL


def test_auto_arm_after_low_loss_streak(ec4):
    cfg = PipelineConfig(learner=LearnerConfig(n_seq=5, n_batch=2, window_stride=5), arm="auto", arm_k=3)
    pipe = MotorPipeline(ec4, cfg)
    feed(pipe, [float(t) for t in range(20)])
    assert len(pipe.updates) == 3
    assert pipe.anomaly.armed
    assert pipe.updates[1].g is None and pipe.updates[2].g == 0.0


def test_never_arm_and_no_learning(ec4):
    pipe = MotorPipeline(ec4, small(arm="never"))
    feed(pipe, [float(t) for t in range(40)])
    assert pipe.g is None and not pipe.anomaly.armed
    frozen = MotorPipeline(ec4, small(learn=False))
    assert all(e is None for e in feed(frozen, [float(t) for t in range(40)], f=100.0))
    assert frozen.c1_est > 30.0


def test_bad_arm_mode():
    with pytest.raises(ValueError):
        PipelineConfig(arm="sometimes")
