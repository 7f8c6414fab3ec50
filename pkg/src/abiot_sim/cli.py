"""Command line entry point: run, plan, sweep, calibrate, validate-partition.

Exit codes: 0 ok, 2 configuration error, 3 partition refused, 4 calibration failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import output
from .config import DEFAULT_CONFIG, load_config, merge, validate
from .errors import ConfigError, DegenerateRegionError, PartitionRefused
from .experiments import calibrate, parameter_sweep, sweep_threads
from .field_model import build_field
from .sim import Metrics, agent_plans, compare_baseline, run
from .swarm import CellAssignment, validate_partition

log = logging.getLogger("abiot_sim")

EXIT_OK, EXIT_CONFIG, EXIT_PARTITION, EXIT_CALIBRATION = 0, 2, 3, 4


def _load(args):
    if args.config:
        return load_config(args.config, args.override)
    return validate(merge(DEFAULT_CONFIG, {})).with_overrides(args.override)


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    result = run(cfg)
    files = {
        "metrics.csv": output.metrics_csv(result.metrics),
        "events.jsonl": output.events_jsonl(result.events),
        "exposure.pgm": output.exposure_pgm(result.exposure.dose),
        "resolved-config.json": cfg.to_json(),
    }
    for name, text in files.items():
        output.atomic_write_text(out / name, text)
    report = compare_baseline(result.metrics)
    print(json.dumps({"effectiveness": round(result.metrics.effectiveness, 6),
                      "gap_to_pesticide_midpoint": round(report.gap, 6)}))
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = _load(args)
    agents, _ = agent_plans(cfg)
    match = [a for a in agents if a.agent_id == args.agent]
    if not match:
        raise ConfigError(f"no agent {args.agent} in this configuration", "sim.n_agents")
    plan = match[0].plan(cfg.spacing_m, int(cfg.path["laps"]))
    output.atomic_write_text(args.out, output.plan_csv(plan.lap_waypoints))
    return EXIT_OK


def _sweep_definition(args):
    sweep = {}
    if args.sweep:
        try:
            sweep = json.loads(Path(args.sweep).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"sweep file is not valid JSON (line {exc.lineno}): {exc.msg}") from None
        unknown = set(sweep) - {"parameter", "values", "seeds"}
        if unknown:
            raise ConfigError(f"unknown sweep keys {sorted(unknown)}")
    if args.param:
        sweep["parameter"] = args.param
    if args.values:
        sweep["values"] = [json.loads(v) for v in args.values.split(",")]
    if args.seeds is not None:
        sweep["seeds"] = args.seeds
    if "parameter" not in sweep or not sweep.get("values"):
        raise ConfigError("sweep needs a parameter and at least one value")
    sweep.setdefault("seeds", 1)
    return sweep


def cmd_sweep(args) -> int:
    cfg = _load(args)
    sweep = _sweep_definition(args)
    for value in sweep["values"]:
        cfg.with_overrides([(sweep["parameter"], value)])  # validate before running anything
    base_seed = int(cfg.sim["seed"])
    seeds = [base_seed + i for i in range(int(sweep["seeds"]))]
    results = parameter_sweep(cfg, sweep["parameter"], sweep["values"], seeds, sweep_threads())
    header = ["parameter", "value", "seed", *Metrics.FIELDS]
    rows = []
    for value, seed, m in results:
        row = m.row()
        rows.append([sweep["parameter"], json.dumps(value), seed, *(row[f] for f in Metrics.FIELDS)])
    output.atomic_write_text(Path(args.out) / "sweep.csv", output.csv_text(header, rows))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    targets = None
    if args.target:
        targets = {}
        for item in args.target:
            name, _, value = item.partition("=")
            try:
                targets[name.strip()] = float(value)
            except ValueError:
                raise ConfigError(f"bad target {item!r}, expected name=value") from None
    seeds = range(args.seeds if args.seeds is not None else 20)
    try:
        result = calibrate(cfg, targets, seeds)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    output.atomic_write_text(args.out, json.dumps(result.to_dict(), indent=2) + "\n")
    if not result.ok:
        if result.unreachable:
            print(f"targets at the probability ceiling: {result.unreachable}", file=sys.stderr)
        print(f"calibration failed; best candidate k={result.k} i_ref={result.i_ref} "
              f"means={result.means}", file=sys.stderr)
        return EXIT_CALIBRATION
    print(json.dumps({"k": result.k, "i_ref": result.i_ref, "means": result.means}))
    return EXIT_OK


def cmd_validate_partition(args) -> int:
    try:
        doc = json.loads(Path(args.assignments).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if isinstance(doc, list):
        doc = {"assignments": doc}
    if "field" in doc:
        field = build_field(merge(DEFAULT_CONFIG["field"], doc["field"]))
    else:
        field = _load(args).field
    try:
        assignments = [CellAssignment.from_dict(a) for a in doc.get("assignments", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad assignment: {exc}", "assignments") from None
    report = validate_partition(assignments, field)
    print(json.dumps(report.to_dict()))
    return EXIT_OK if report.ok else EXIT_PARTITION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config (defaults when omitted)")
    common.add_argument("--override", action="append", default=[], metavar="K=V",
                        help="dotted override, e.g. sim.seed=9 (repeatable)")
    common.add_argument("--seeds", type=int, help="number of seeds (sweep, calibrate)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="abiot-sim", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="simulate and write outputs")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("plan", parents=[common], help="write mission waypoints as CSV")
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--agent", type=int, default=0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sweep", help="JSON file with parameter, values, seeds")
    p.add_argument("--param", help="dotted parameter to sweep")
    p.add_argument("--values", help="comma-separated JSON values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("calibrate", parents=[common], help="fit repellence constants")
    p.add_argument("--out", required=True, help="JSON path for the result")
    p.add_argument("--target", action="append", metavar="NAME=VALUE",
                   help="standalone|coordinated|system target (repeatable)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("validate-partition", parents=[common],
                       help="check an assignments file for overlap and gaps")
    p.add_argument("--assignments", required=True)
    p.set_defaults(func=cmd_validate_partition)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DegenerateRegionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PartitionRefused as exc:
        print(f"partition refused: {json.dumps(exc.report.to_dict())}", file=sys.stderr)
        print(json.dumps(exc.report.to_dict()))
        return EXIT_PARTITION


if __name__ == "__main__":
    sys.exit(main())
