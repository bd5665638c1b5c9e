"""Command-line entry point: ``motortherm <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import scenarios
from .config import SCENARIOS, UsageError, load_file, merge, resolve, to_dict
from .learner import params_from_snapshot
from .model import InvalidSpecError
from .replay import TelemetryParseError, read_telemetry, replay
from .scenarios import Artifacts

log = logging.getLogger("motortherm")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4

RUNNERS = {
    "sim-learn": scenarios.sim_learn,
    "sim-quant": scenarios.sim_quant,
    "sim-fault": scenarios.sim_fault,
    "sim-control": scenarios.sim_control,
    "closed-loop": scenarios.closed_loop,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with configuration overrides")
    p.add_argument("--seed", type=int, help="RNG seed (PCG64)")
    p.add_argument("--out", help="output directory for artifacts")
    p.add_argument("--motor", help="motor preset (EC4pole90W, EC16_60W) or path to a JSON spec")
    p.add_argument("--duration", type=float, help="simulated duration [s]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motortherm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim-learn", help="online learning against a perturbed plant")
    _common(p)
    p.add_argument("--telemetry", action="store_true", help="also write telemetry.csv at plant rate")

    p = sub.add_parser("sim-quant", help="learning from several random plants, estimated vs true core")
    _common(p)

    p = sub.add_parser("sim-fault", help="anomaly detection under an injected fault")
    _common(p)
    p.add_argument("--fault", choices=("stuck_sensor", "stuck_tension", "none"))
    p.add_argument("--fault-value", type=float)

    p = sub.add_parser("sim-control", help="receding-horizon tension ceiling against the plant")
    _common(p)
    p.add_argument("--params", help="parameter snapshot JSON to use as the controller model")
    p.add_argument("--model", choices=("learned", "default"))

    p = sub.add_parser("closed-loop", help="controller + limiter on an elastic muscle")
    _common(p)
    p.add_argument("--params", help="parameter snapshot JSON to use as the model")

    p = sub.add_parser("replay", help="run estimator/learner/anomaly over recorded telemetry")
    _common(p)
    p.add_argument("telemetry_file", help="CSV with header t,c2,f")
    p.add_argument("--params", help="initial parameter snapshot JSON")

    p = sub.add_parser("dump-config", help="print the effective configuration")
    p.add_argument("scenario", nargs="?", default="sim-learn", choices=SCENARIOS)
    _common(p)

    p = sub.add_parser("gnuplot", help="convert a trace CSV into a whitespace-separated .dat file")
    p.add_argument("trace")
    p.add_argument("output")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    data: dict = {}
    if getattr(args, "config", None):
        data = load_file(args.config)
        data.pop("scenario", None)
    flags: dict = {}
    for key in ("seed", "motor", "duration"):
        value = getattr(args, key, None)
        if value is not None:
            flags[key] = value
    if getattr(args, "telemetry", False):
        flags["telemetry"] = True
    if getattr(args, "fault", None):
        fault = {"kind": args.fault}
        if args.fault_value is not None:
            fault["value"] = args.fault_value
        elif args.fault == "stuck_sensor":
            fault["value"] = 30.0
        elif args.fault == "stuck_tension":
            fault["value"] = 200.0
        flags["plant"] = {"fault": fault}
    if getattr(args, "params", None) and args.command != "replay":
        flags["control"] = {"params_path": args.params}
    if getattr(args, "model", None):
        flags.setdefault("control", {})["model"] = args.model
    return merge(data, flags)


def _summary(report: dict) -> dict:
    return {k: v for k, v in report.items() if not (isinstance(v, (list, dict)) and len(v) > 12)}


def _run(args: argparse.Namespace) -> int:
    if args.command == "gnuplot":
        return gnuplot(args.trace, args.output)
    scenario = args.scenario if args.command == "dump-config" else args.command
    cfg = resolve(scenario, _overrides(args))
    if args.command == "dump-config":
        print(json.dumps(to_dict(cfg), indent=2, sort_keys=True))
        return EXIT_OK

    artifacts = Artifacts() if args.out else None
    if args.command == "replay":
        records = read_telemetry(args.telemetry_file)
        if args.params:
            params = params_from_snapshot(json.loads(Path(args.params).read_text()))
        else:
            params = scenarios.default_model(cfg)
        pipe = replay(records, params, scenarios._pipeline_config(cfg), artifacts, cfg.trace_dt)
        report = {
            "scenario": "replay",
            "records": len(records),
            "final_P": list(pipe.params.P),
            "n_updates": len(pipe.updates),
            "final_g": pipe.g,
            "final_verdict": pipe.verdict,
        }
    else:
        report = RUNNERS[args.command](cfg, artifacts=artifacts)

    if artifacts is not None:
        artifacts.lines("report.json").append(json.dumps(report, indent=2, sort_keys=True))
        artifacts.lines("config.json").append(json.dumps(to_dict(cfg), indent=2, sort_keys=True))
        artifacts.save(Path(args.out))
    print(json.dumps(_summary(report), indent=2, sort_keys=True))
    return EXIT_OK


def gnuplot(trace: str, output: str) -> int:
    with open(trace, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TelemetryParseError(1, "empty trace")
    header = lines[0].split(",")
    rows = ["# " + " ".join(header)]
    for line in lines[1:]:
        rows.append(" ".join(v if v else "NaN" for v in line.split(",")))
    Path(output).write_text("\n".join(rows) + "\n", encoding="utf-8")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except (UsageError, InvalidSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TelemetryParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
