import json

import pytest

from motortherm.cli import EXIT_IO, EXIT_PARSE, EXIT_USAGE, main
from motortherm.config import UsageError, from_dict, resolve, to_dict


def test_defaults_round_trip():
    cfg = resolve("sim-learn")
    assert from_dict(to_dict(cfg)) == cfg
    assert cfg.learner.n_seq == 30 and cfg.controller.beta == 30.0
    assert cfg.plant.p_sim == (0.5, 0.5, -0.5, -0.5, 0.5)


def test_scenario_defaults_and_overrides():
    cfg = resolve("sim-fault", {"plant": {"fault": {"kind": "stuck_tension", "value": 200.0}}})
    assert cfg.duration == 2000.0
    assert cfg.plant.fault.kind == "stuck_tension"
    assert cfg.plant.p_sim == (0.0,) * 5
    assert resolve("sim-learn", {"learner": {"alpha": 0.05}}).learner.alpha == 0.05


@pytest.mark.parametrize(
    "overrides",
    [{"bogus": 1}, {"learner": {"nope": 1}}, {"duration": -1.0}, {"learner": {"n_seq": 1}}, {"anomaly": {"arm": "later"}}],
)
def test_bad_config(overrides):
    with pytest.raises(UsageError):
        resolve("sim-learn", overrides)


def test_unknown_motor():
    with pytest.raises(UsageError):
        resolve("sim-learn", {"motor": "EC99"}).motor_spec()


def test_custom_motor_file(tmp_path):
    path = tmp_path / "motor.json"
    path.write_text(json.dumps({"name": "x", "C1": 1.0, "C2": 10.0, "R1": 2.0, "R2": 20.0, "K": 1e-4}))
    assert resolve("sim-learn", {"motor": str(path)}).motor_spec().R2 == 20.0


def test_dump_config(capsys, tmp_path):
    assert main(["dump-config", "closed-loop", "--seed", "7"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["seed"] == 7 and doc["scenario"] == "closed-loop"
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    assert main(["dump-config", "closed-loop", "--config", str(path)]) == 0
    assert json.loads(capsys.readouterr().out) == doc


def test_sim_learn_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["sim-learn", "--duration", "120", "--seed", "2", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["seed"] == 2
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0].startswith("time_s,f_cmd,f_true")
    assert len(lines) == 122
    assert json.loads((out / "final_params.json").read_text())["schema"] == "motortherm.params/1"


def test_exit_codes(tmp_path, capsys):
    assert main(["sim-learn", "--motor", "EC99"]) == EXIT_USAGE
    assert main(["sim-learn", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["sim-learn", "--config", str(bad)]) == EXIT_USAGE
    tele = tmp_path / "t.csv"
    tele.write_text("t,c2,f\n0,30,1\n0,30,1\n")
    assert main(["replay", str(tele)]) == EXIT_PARSE
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_gnuplot_export(tmp_path):
    trace = tmp_path / "trace.csv"
    trace.write_text("time_s,g\n0.0,\n1.0,0.5\n")
    out = tmp_path / "trace.dat"
    assert main(["gnuplot", str(trace), str(out)]) == 0
    assert out.read_text() == "# time_s g\n0.0 NaN\n1.0 0.5\n"
