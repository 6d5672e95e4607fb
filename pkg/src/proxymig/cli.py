"""Command-line front end.

Subcommands:
  gen-trace  write a synthetic mobility trace CSV
  run        execute every configured strategy and write report pairs
  sweep      re-run across a green-supply or delay-coefficient grid
  validate   check a config file and print the resolved document

Exit codes: 0 success, 1 usage or config error, 2 infeasible instance,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError, build_scenario, build_topology, build_trace, load_config
from .mobility import TraceFormatError, generate_synthetic, save_trace
from .optimizer import InfeasibleError
from .simulator import (
    run as run_scenario,
    sweep_green,
    sweep_lambda,
    write_report_csv,
    write_report_json,
)
from .topology import Cloudlet, build_grid

__all__ = ["main", "entry_point"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="proxymig", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-trace", help="write a synthetic mobility trace CSV")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--devices", type=int, required=True)
    gen.add_argument("--slots", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--rows", type=int, default=5)
    gen.add_argument("--cols", type=int, default=5)
    gen.add_argument("--cell-km", type=float, default=1.0)
    gen.add_argument("--speed-min", type=float, default=3.0)
    gen.add_argument("--speed-max", type=float, default=30.0)
    gen.add_argument("--slot-hours", type=float, default=0.5)

    run_p = sub.add_parser("run", help="run every configured strategy")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--output-dir", default=None,
                       help="override the config's output_dir")

    sweep_p = sub.add_parser("sweep", help="run a parameter sweep")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--axis", required=True, choices=["green", "lambda"])
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated list, e.g. 0,250,500")
    sweep_p.add_argument("--output-dir", default=None)

    val_p = sub.add_parser("validate", help="check a config file")
    val_p.add_argument("--config", required=True)

    return parser


def _cmd_gen_trace(args) -> int:
    if args.devices < 1:
        raise _UsageError("--devices must be at least 1")
    if args.slots < 1:
        raise _UsageError("--slots must be at least 1")
    if args.speed_min < 0 or args.speed_max < args.speed_min:
        raise _UsageError("speed range must satisfy 0 <= min <= max")
    template = Cloudlet(id=-1, position=(0.0, 0.0), pm_count=5, vms_per_pm=6,
                        green_w=0.0)
    topology = build_grid(args.rows, args.cols, args.cell_km, template,
                          delay_coeff_ms_per_km=25.0, delay_offset_ms=10.0)
    trace = generate_synthetic(
        seed=args.seed,
        device_count=args.devices,
        slot_count=args.slots,
        topology=topology,
        speed_kmh=(args.speed_min, args.speed_max),
        slot_duration_hours=args.slot_hours,
    )
    save_trace(trace, args.out)
    print(f"wrote {trace.slot_count}x{trace.device_count} trace to {args.out}")
    return EXIT_OK


def _report_paths(output_dir: str, stem: str) -> tuple[str, str]:
    return (os.path.join(output_dir, f"{stem}.csv"),
            os.path.join(output_dir, f"{stem}.json"))


def _cmd_run(args) -> int:
    config = load_config(args.config)
    output_dir = args.output_dir or config["output_dir"]
    os.makedirs(output_dir, exist_ok=True)
    topology = build_topology(config)
    trace = build_trace(config, topology)
    for strategy in config["strategies"]:
        scenario = build_scenario(config, strategy, topology=topology, trace=trace)
        report = run_scenario(scenario)
        csv_path, json_path = _report_paths(output_dir, f"run_{strategy}")
        write_report_csv(report, csv_path)
        write_report_json(report, json_path)
        print(
            f"{strategy}: avg_delay={report.avg_delay_ms:.3f} ms "
            f"avg_on_grid={report.avg_on_grid_w:.1f} W "
            f"violations={report.total_violations} "
            f"migrations={report.total_migrations} -> {csv_path}"
        )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise _UsageError(f"--values: {exc}") from exc
    if not values:
        raise _UsageError("--values must list at least one number")
    output_dir = args.output_dir or config["output_dir"]
    os.makedirs(output_dir, exist_ok=True)
    topology = build_topology(config)
    trace = build_trace(config, topology)

    sweep_fn = sweep_green if args.axis == "green" else sweep_lambda
    summary_rows = []
    for strategy in config["strategies"]:
        scenario = build_scenario(config, strategy, topology=topology, trace=trace)
        for report in sweep_fn(scenario, values):
            stem = f"sweep_{args.axis}_{report.sweep_value:g}_{strategy}"
            csv_path, json_path = _report_paths(output_dir, stem)
            write_report_csv(report, csv_path)
            write_report_json(report, json_path)
            summary_rows.append(
                (report.sweep_value, strategy, report.avg_delay_ms,
                 report.max_delay_ms, report.avg_violation_rate,
                 report.avg_on_grid_w, report.total_migrations)
            )

    summary_path = os.path.join(output_dir, f"sweep_{args.axis}_summary.csv")
    lines = [f"{args.axis},strategy,avg_delay_ms,max_delay_ms,"
             "avg_violation_rate,avg_on_grid_w,total_migrations"]
    for row in summary_rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    with open(summary_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(summary_rows)} sweep rows -> {summary_path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    json.dump(config.to_dict(), sys.stdout, indent=2)
    print()
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen-trace":
            return _cmd_gen_trace(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "validate":
            return _cmd_validate(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, TraceFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"infeasible: {exc} (cloudlet capacity constraint)", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
