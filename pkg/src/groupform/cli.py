"""Command-line entry point: simulate, sweep, verify, render, replay.

Exit codes are a stable contract:
  0  success (and: partition is stable / replay matched)
  1  usage error
  2  validation or I/O error (message names the offending field or file)
  3  run hit the attempt budget without converging (partial trace written)
  4  verification failed (unstable partition / replay mismatch)

The default output directory is the GROUPFORM_OUT environment variable,
falling back to the current directory. Every command is a pure function of
its inputs, flags, and seed: rerunning writes byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .dynamics import Simulation
from .experiments import (
    DEFAULT_R_MAX_GRID,
    DEFAULT_X_MAX_GRID,
    equilibrium_metrics,
    run_sweep,
    trend_checks,
)
from .model import GameConfig, Partition, ValidationError
from .oracle import verify_ise
from .persistence import (
    IntegrityError,
    TraceParseError,
    _move_to_obj,
    load_partition,
    load_scenario,
    load_trace,
    save_sweep_csv,
    save_sweep_json,
    save_trace,
    scenario_digest,
    trace_record_lines,
)
from .render import RenderSpec, render_trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NONCONVERGED = 3
EXIT_VERIFY_FAILED = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for
    # validation problems, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _default_out() -> str:
    return os.environ.get("GROUPFORM_OUT", ".")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    cfg = GameConfig(k=scenario.k, distance_decay=args.distance_decay)
    sim = Simulation(scenario, cfg, seed=args.seed,
                     max_iterations=args.max_iterations)
    trace = sim.run()
    out = _out_dir(args)
    trace_path = out / f"{Path(args.scenario).stem}_seed{args.seed}.trace.jsonl"
    save_trace(trace, trace_path)
    metrics = equilibrium_metrics(trace)
    print(json.dumps(asdict(metrics), sort_keys=True))
    print(f"trace written to {trace_path}", file=sys.stderr)
    return EXIT_OK if trace.converged else EXIT_NONCONVERGED


def cmd_sweep(args) -> int:
    result = run_sweep(
        x_max_list=args.x_max,
        r_max_list=args.r_max,
        replications=args.replications,
        base_seed=args.seed,
        m=args.m,
        k=args.k,
        distance_decay=args.distance_decay,
        integer_resources=args.integer_resources,
        max_iterations=args.max_iterations,
        workers=args.workers,
    )
    out = _out_dir(args)
    save_sweep_csv(result, out / "sweep.csv")
    save_sweep_json(result, out / "sweep.json")
    report = trend_checks(result)
    print(json.dumps(report.as_dict(), sort_keys=True))
    print(f"sweep written to {out / 'sweep.csv'} and {out / 'sweep.json'}",
          file=sys.stderr)
    return EXIT_OK


def _check_digest(scenario, record, trace_path) -> None:
    digest = scenario_digest(scenario)
    if digest != record.scenario_digest:
        raise IntegrityError(
            f"scenario digest {digest} does not match trace header "
            f"{record.scenario_digest} in {trace_path}"
        )


def cmd_verify(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.partition is not None:
        partition = load_partition(args.partition)
    else:
        record = load_trace(args.trace)
        _check_digest(scenario, record, args.trace)
        partition = Partition.from_blocks(record.final_partition)
    partition.validate(scenario.n)
    report = verify_ise(partition, scenario)
    print(json.dumps(
        {
            "is_ise": report.is_ise,
            "violations": [
                {"agent": agent, "move": _move_to_obj(move)}
                for agent, move in report.violations
            ],
        },
        sort_keys=True,
    ))
    return EXIT_OK if report.is_ise else EXIT_VERIFY_FAILED


def cmd_render(args) -> int:
    scenario = load_scenario(args.scenario)
    record = load_trace(args.trace)
    _check_digest(scenario, record, args.trace)
    spec = RenderSpec(
        iterations=tuple(args.iterations) if args.iterations else None,
        canvas=args.canvas,
        legend=not args.no_legend,
    )
    try:
        written = render_trace(scenario, record.events, record.total_iterations,
                               spec, _out_dir(args))
    except ValueError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    for path in written:
        print(path)
    return EXIT_OK


def cmd_replay(args) -> int:
    scenario = load_scenario(args.scenario)
    record = load_trace(args.trace)
    _check_digest(scenario, record, args.trace)
    cfg = GameConfig(k=record.k, distance_decay=record.distance_decay)
    sim = Simulation(scenario, cfg, seed=record.seed,
                     max_iterations=record.max_iterations)
    fresh = sim.run()
    from .persistence import trace_as_record

    fresh_lines = trace_record_lines(trace_as_record(fresh))
    disk_lines = Path(args.trace).read_text(encoding="utf-8").splitlines()
    if fresh_lines == disk_lines:
        print("replay OK: trace reproduced byte-for-byte")
        return EXIT_OK
    for i, (a, b) in enumerate(zip(disk_lines, fresh_lines), 1):
        if a != b:
            sys.stderr.write(f"replay mismatch at line {i}:\n  file:   {a}\n"
                             f"  replay: {b}\n")
            break
    else:
        sys.stderr.write(
            f"replay mismatch: line count {len(disk_lines)} vs {len(fresh_lines)}\n"
        )
    return EXIT_VERIFY_FAILED


def build_parser() -> _Parser:
    parser = _Parser(prog="groupform",
                     description="Spatial group-formation game toolkit")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run one scenario to a stable partition")
    sim.add_argument("--scenario", required=True, help="scenario JSON file")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--lambda", dest="distance_decay", type=float, default=1.0,
                     help="distance decay rate (default 1.0)")
    sim.add_argument("--max-iterations", type=int, default=None)
    sim.add_argument("--out", default=_default_out(), help="output directory")
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="grid of location/resource ranges")
    sw.add_argument("--x-max", type=float, nargs="+",
                    default=list(DEFAULT_X_MAX_GRID))
    sw.add_argument("--r-max", type=float, nargs="+",
                    default=list(DEFAULT_R_MAX_GRID))
    sw.add_argument("--replications", type=int, default=200)
    sw.add_argument("--seed", type=int, default=0, help="base seed")
    sw.add_argument("--m", type=int, default=5, help="agents per sector")
    sw.add_argument("--k", type=int, default=3, help="sector count")
    sw.add_argument("--lambda", dest="distance_decay", type=float, default=1.0)
    sw.add_argument("--max-iterations", type=int, default=None)
    sw.add_argument("--integer-resources", action="store_true")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", default=_default_out())
    sw.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", help="check a partition for stability")
    ver.add_argument("--scenario", required=True)
    src = ver.add_mutually_exclusive_group(required=True)
    src.add_argument("--partition", help="partition JSON file")
    src.add_argument("--trace", help="trace file; its final partition is checked")
    ver.set_defaults(func=cmd_verify, partition=None, trace=None)

    ren = sub.add_parser("render", help="SVG storyboard frames from a trace")
    ren.add_argument("--trace", required=True)
    ren.add_argument("--scenario", required=True)
    ren.add_argument("--iterations", type=int, nargs="+", default=None,
                     help="explicit iterations (default: keyframes)")
    ren.add_argument("--keyframes", action="store_true",
                     help="auto-select composition changes (the default)")
    ren.add_argument("--canvas", type=int, default=640, help="canvas size, px")
    ren.add_argument("--no-legend", action="store_true")
    ren.add_argument("--out", default=_default_out())
    ren.set_defaults(func=cmd_render)

    rep = sub.add_parser("replay", help="re-run a trace and compare byte-for-byte")
    rep.add_argument("--trace", required=True)
    rep.add_argument("--scenario", required=True)
    rep.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ValidationError, TraceParseError, IntegrityError, OSError,
            json.JSONDecodeError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
