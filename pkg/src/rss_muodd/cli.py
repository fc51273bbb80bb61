"""Command-line entry point: ``rss-muodd {dmin,table,simulate,verify,odd-run}``.

Exit codes: 0 success, 1 bad input or failed verification, 2 no safe
distance exists (the rear vehicle cannot hold its position).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

from . import kinematics, oracle
from .errors import InvalidConfigurationError, InvalidParameterError, NoSafeDistanceError, RssError
from .fileio import ParseError, load_evidence_log, load_odd_config, load_scenario, load_table_config
from .odd.machine import replay
from .odd.partition import DEFAULT_GRID, build_partition_table, figure4_table
from .units import UnitError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_SAFE_DISTANCE = 2

PRESETS = ("urban_children", "winter_road")


def _clean(obj):
    """Make ``obj`` strict-JSON safe: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump_json(obj, out):
    out.write(json.dumps(_clean(obj), indent=2, ensure_ascii=False, allow_nan=False))
    out.write("\n")


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else _clean(v)
    if isinstance(v, (dict, list)):
        return json.dumps(_clean(v), sort_keys=True, ensure_ascii=False)
    return str(v)


def _dump_csv(header, rows, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(v) for v in row])
    out.write(buf.getvalue())


def cmd_dmin(args, out) -> int:
    scenario = load_scenario(args.scenario)
    result = kinematics.d_min(scenario.params).as_dict()
    result["d_min_display"] = f"{result['d_min']:.1f}"
    if args.format == "json":
        _dump_json(result, out)
    else:
        _dump_csv(list(result), [list(result.values())], out)
    return EXIT_OK


def cmd_table(args, out) -> int:
    if args.figure4 == bool(args.config):
        raise InvalidConfigurationError("give exactly one of --figure4 or --config")
    if args.grid < 2:
        raise InvalidConfigurationError("--grid must be at least 2")
    if args.figure4:
        table = figure4_table(args.grid)
    else:
        spec = load_table_config(args.config)
        table = build_partition_table(
            spec.row_bins, spec.col_bins, spec.fixed, spec.row_param, spec.col_param, args.grid
        )
    records = table.records()
    if args.format == "json":
        _dump_json(
            {
                "row_param": table.row_param,
                "col_param": table.col_param,
                "shape": list(table.shape),
                "display": table.display_grid(),
                "cells": records,
            },
            out,
        )
    else:
        header = ["row", "col", "d_min", "d_min_display", "special_case"]
        _dump_csv(header, [[r[k] for k in header] for r in records], out)
    return EXIT_OK


def cmd_simulate(args, out, err) -> int:
    scenario = load_scenario(args.scenario)
    gap = args.gap if args.gap is not None else scenario.initial_gap
    dt = args.dt if args.dt is not None else scenario.dt
    if gap is None:
        gap = kinematics.d_min(scenario.params).d_min
    if dt is None:
        dt = 0.01
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")
    trace = oracle.simulate(scenario.params, gap, dt)
    summary = trace.summary()
    if args.format == "json":
        _dump_json({"initial_gap": gap, "dt": dt, "summary": summary, "columns": list(trace.COLUMNS),
                    "rows": trace.samples}, out)
    else:
        _dump_csv(list(trace.COLUMNS), trace.samples, out)
    err.write(
        "min_gap={min_gap!r} min_gap_time={min_gap_time!r} collided={c}\n".format(
            c="true" if summary["collided"] else "false", **summary
        )
    )
    return EXIT_OK


def cmd_verify(args, out) -> int:
    from .verify import run_verify

    report = run_verify(args.seed, args.draws, workers=args.workers, corrupt=args.corrupt)
    if args.format == "json":
        _dump_json(report.as_dict(), out)
    else:
        header = ["property", "passed", "total", "worst_deviation", "ok"]
        rows = [[p.name, p.passed, p.total, p.worst, p.ok] for p in report.properties]
        _dump_csv(header, rows, out)
    return EXIT_OK if report.ok else EXIT_INPUT


def _config_path(value: str):
    if value in PRESETS:
        return resources.files("rss_muodd") / "configs" / f"{value}.yaml"
    return value


def cmd_odd_run(args, out) -> int:
    config = load_odd_config(_config_path(args.config), args.grid)
    log = load_evidence_log(args.log) if args.log else []
    trace = replay(config, log, args.initial)
    if args.format == "json":
        _dump_json(trace, out)
    else:
        header = ["t", "active_odd", "map_hypothesis", "d_min_worst", "behavior", "evidence", "posterior"]
        _dump_csv(header, [[r[k] for k in header] for r in trace], out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rss-muodd", description="Minimum safe following distance and μODD tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p, default="json"):
        p.add_argument("--format", choices=("csv", "json"), default=default)

    p = sub.add_parser("dmin", help="minimum safe following distance for one scenario file")
    p.add_argument("scenario")
    add_format(p)

    p = sub.add_parser("table", help="worst-case distance table over parameter bins")
    p.add_argument("--figure4", action="store_true", help="built-in lead/rear braking table")
    p.add_argument("--config", help="YAML table configuration")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="interior grid points per dimension")
    add_format(p, "csv")

    p = sub.add_parser("simulate", help="sampled trace of both vehicles braking")
    p.add_argument("scenario")
    p.add_argument("--gap", type=float, help="initial gap in m (default: file value, else d_min)")
    p.add_argument("--dt", type=float, help="sample step in s (default: file value, else 0.01)")
    add_format(p, "csv")

    p = sub.add_parser("verify", help="seeded property suite against the simulation oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--corrupt", type=float, default=0.0, help=argparse.SUPPRESS)
    add_format(p, "csv")

    p = sub.add_parser("odd-run", help="replay an evidence log through the μODD state machine")
    p.add_argument("--config", required=True, help=f"YAML file or preset ({', '.join(PRESETS)})")
    p.add_argument("--log", help="JSON-lines evidence log (omit for an empty log)")
    p.add_argument("--initial", help="initial μODD id (default: first declared)")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    add_format(p)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.command == "dmin":
            return cmd_dmin(args, out)
        if args.command == "table":
            return cmd_table(args, out)
        if args.command == "simulate":
            return cmd_simulate(args, out, err)
        if args.command == "verify":
            return cmd_verify(args, out)
        return cmd_odd_run(args, out)
    except NoSafeDistanceError as exc:
        err.write(f"no-safe-distance: {exc}\n")
        return EXIT_NO_SAFE_DISTANCE
    except (ParseError, UnitError, InvalidConfigurationError, InvalidParameterError, RssError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
