"""File formats: scenarios, partitions, traces, and sweep outputs.

Everything is line-oriented JSON (JSONL for traces) with a declared format
version. Serialization is canonical: keys sorted, compact separators, and
floats written in their shortest round-trip form, so identical inputs
produce byte-identical files and golden-file diffs stay readable.

The scenario digest hashes the canonical form of the logical content
(k plus the agent table, provenance excluded), so re-ordered keys or an
int-vs-float spelling in the source file cannot change it.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .dynamics import MoveOption, SimTrace, UpdateEvent
from .experiments import EquilibriumMetrics, SweepResult, CellStats, equilibrium_metrics
from .model import (
    Agent,
    Partition,
    Scenario,
    ValidationError,
)

FORMAT_VERSION = 1
ENGINE_VERSION = "0.1.0"


class MalformedRecordError(ValidationError):
    """A file record is structurally wrong (bad JSON, missing or mistyped field)."""


class TraceParseError(ValueError):
    """A trace file failed to parse; the message names the offending line."""


class IntegrityError(ValueError):
    """A digest cross-check failed (file does not match its companion)."""


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


# -- scenarios -----------------------------------------------------------


def _scenario_payload(scenario: Scenario) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "k": scenario.k,
        "agents": [
            {
                "id": a.id,
                "category": a.category,
                "resource": float(a.resource),
                "x": float(a.x),
                "y": float(a.y),
            }
            for a in scenario.agents
        ],
    }


def scenario_digest(scenario: Scenario) -> str:
    payload = _scenario_payload(scenario)
    raw = canonical_dumps(payload).encode("utf-8")
    return "sha256:" + hashlib.sha256(raw).hexdigest()


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    payload = _scenario_payload(scenario)
    if scenario.provenance:
        payload["provenance"] = scenario.provenance
    Path(path).write_text(canonical_dumps(payload) + "\n", encoding="utf-8")


def _require(obj: dict, key: str, types, where: str):
    if key not in obj:
        raise MalformedRecordError(f"{where}: missing field '{key}'")
    v = obj[key]
    if not isinstance(v, types) or isinstance(v, bool):
        raise MalformedRecordError(f"{where}: field '{key}' has wrong type")
    return v


def load_scenario(path: str | Path) -> Scenario:
    """Load and fully validate an agent table.

    Structural problems raise MalformedRecordError; semantic violations
    raise the specific error named after the broken invariant (duplicate
    id, non-dense ids, nonpositive resource, category out of range, empty
    table).
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedRecordError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise MalformedRecordError(f"{path}: top level must be an object")
    k = _require(obj, "k", int, str(path))
    agents_raw = _require(obj, "agents", list, str(path))
    agents = []
    for pos, rec in enumerate(agents_raw):
        where = f"{path}: agents[{pos}]"
        if not isinstance(rec, dict):
            raise MalformedRecordError(f"{where}: must be an object")
        agents.append(
            Agent(
                id=_require(rec, "id", int, where),
                category=_require(rec, "category", int, where),
                resource=float(_require(rec, "resource", (int, float), where)),
                x=float(_require(rec, "x", (int, float), where)),
                y=float(_require(rec, "y", (int, float), where)),
            )
        )
    provenance = obj.get("provenance")
    return Scenario(agents, k=k, provenance=provenance)


def demo_scenario_path() -> Path:
    """Path of the bundled nine-organization demo scenario."""
    return Path(str(resources.files("groupform").joinpath("data/demo9.json")))


def load_demo_scenario() -> Scenario:
    return load_scenario(demo_scenario_path())


# -- partitions ----------------------------------------------------------


def save_partition(partition: Partition, path: str | Path) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "groups": [list(b) for b in partition.blocks()],
    }
    Path(path).write_text(canonical_dumps(payload) + "\n", encoding="utf-8")


def load_partition(path: str | Path) -> Partition:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedRecordError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise MalformedRecordError(f"{path}: top level must be an object")
    groups = _require(obj, "groups", list, str(path))
    blocks = []
    for pos, b in enumerate(groups):
        if not isinstance(b, list) or not all(
            isinstance(i, int) and not isinstance(i, bool) for i in b
        ):
            raise MalformedRecordError(f"{path}: groups[{pos}] must be a list of ids")
        blocks.append(b)
    return Partition.from_blocks(blocks)


# -- traces --------------------------------------------------------------


@dataclass
class TraceRecord:
    """File-level image of a run: header fields, events, footer fields."""

    format_version: int
    engine_version: str
    scenario_digest: str
    n_agents: int
    k: int
    distance_decay: float
    log_tie_tol: float
    seed: int
    max_iterations: int
    events: list[UpdateEvent] = field(default_factory=list)
    converged: bool = False
    total_iterations: int = 0
    accepted_updates: int = 0
    potential_increases: int = 0
    potential_equals: int = 0
    potential_decreases: int = 0
    final_partition: tuple[tuple[int, ...], ...] = ()
    metrics: EquilibriumMetrics | None = None


def _move_to_obj(m: MoveOption | None):
    if m is None:
        return None
    return {
        "kind": m.kind,
        "target": m.target,
        "mover_new_log_utility": m.mover_new_log_utility,
        "target_old_log_utility": m.target_old_log_utility,
        "target_new_log_utility": m.target_new_log_utility,
    }


def _move_from_obj(obj) -> MoveOption | None:
    if obj is None:
        return None
    return MoveOption(
        kind=obj["kind"],
        target=obj["target"],
        mover_new_log_utility=obj["mover_new_log_utility"],
        target_old_log_utility=obj["target_old_log_utility"],
        target_new_log_utility=obj["target_new_log_utility"],
    )


def _event_to_obj(e: UpdateEvent) -> dict:
    return {
        "type": "event",
        "iteration": e.iteration,
        "agent": e.agent,
        "attempted": e.attempted,
        "move": _move_to_obj(e.accepted_move),
        "new_group": e.new_group,
        "remaining_after": e.remaining_after,
        "potential_after": list(e.potential_after),
        "potential_cmp": e.potential_cmp,
    }


def _event_from_obj(obj: dict) -> UpdateEvent:
    return UpdateEvent(
        iteration=obj["iteration"],
        agent=obj["agent"],
        attempted=obj["attempted"],
        accepted_move=_move_from_obj(obj["move"]),
        new_group=obj["new_group"],
        remaining_after=obj["remaining_after"],
        potential_after=tuple(obj["potential_after"]),
        potential_cmp=obj["potential_cmp"],
    )


def _metrics_to_obj(m: EquilibriumMetrics) -> dict:
    return {
        "num_groups": m.num_groups,
        "mean_group_size": m.mean_group_size,
        "mean_sectors_per_group": m.mean_sectors_per_group,
        "iterations": m.iterations,
        "converged": m.converged,
    }


def _metrics_from_obj(obj) -> EquilibriumMetrics | None:
    if obj is None:
        return None
    return EquilibriumMetrics(
        num_groups=obj["num_groups"],
        mean_group_size=obj["mean_group_size"],
        mean_sectors_per_group=obj["mean_sectors_per_group"],
        iterations=obj["iterations"],
        converged=obj["converged"],
    )


def trace_as_record(trace: SimTrace) -> TraceRecord:
    from .model import LOG_TIE_TOL

    return TraceRecord(
        format_version=FORMAT_VERSION,
        engine_version=ENGINE_VERSION,
        scenario_digest=scenario_digest(trace.scenario),
        n_agents=trace.scenario.n,
        k=trace.cfg.k,
        distance_decay=trace.cfg.distance_decay,
        log_tie_tol=LOG_TIE_TOL,
        seed=trace.seed,
        max_iterations=trace.max_iterations,
        events=list(trace.events),
        converged=trace.converged,
        total_iterations=trace.total_iterations,
        accepted_updates=trace.accepted_updates,
        potential_increases=trace.potential_increases,
        potential_equals=trace.potential_equals,
        potential_decreases=trace.potential_decreases,
        final_partition=trace.final.blocks(),
        metrics=equilibrium_metrics(trace),
    )


def trace_record_lines(record: TraceRecord) -> list[str]:
    header = {
        "type": "header",
        "format_version": record.format_version,
        "engine_version": record.engine_version,
        "scenario_digest": record.scenario_digest,
        "n_agents": record.n_agents,
        "k": record.k,
        "distance_decay": record.distance_decay,
        "log_tie_tol": record.log_tie_tol,
        "seed": record.seed,
        "max_iterations": record.max_iterations,
    }
    footer = {
        "type": "footer",
        "converged": record.converged,
        "total_iterations": record.total_iterations,
        "accepted_updates": record.accepted_updates,
        "potential_increases": record.potential_increases,
        "potential_equals": record.potential_equals,
        "potential_decreases": record.potential_decreases,
        "final_partition": [list(b) for b in record.final_partition],
        "metrics": _metrics_to_obj(record.metrics) if record.metrics else None,
    }
    lines = [canonical_dumps(header)]
    lines.extend(canonical_dumps(_event_to_obj(e)) for e in record.events)
    lines.append(canonical_dumps(footer))
    return lines


def write_trace_record(record: TraceRecord, path: str | Path) -> None:
    Path(path).write_text("\n".join(trace_record_lines(record)) + "\n", encoding="utf-8")


def save_trace(trace: SimTrace, path: str | Path) -> TraceRecord:
    record = trace_as_record(trace)
    write_trace_record(record, path)
    return record


def load_trace(path: str | Path) -> TraceRecord:
    """Parse a trace file; errors name the line they occurred on."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise TraceParseError(f"{path}: line 1: empty trace file")
    parsed = []
    for no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            parsed.append((no, json.loads(line)))
        except json.JSONDecodeError as e:
            raise TraceParseError(f"{path}: line {no}: invalid JSON: {e}") from e
    no, head = parsed[0]
    if head.get("type") != "header":
        raise TraceParseError(f"{path}: line {no}: expected header record")
    no, tail = parsed[-1]
    if tail.get("type") != "footer":
        raise TraceParseError(
            f"{path}: line {no}: truncated trace, expected footer record"
        )
    try:
        record = TraceRecord(
            format_version=head["format_version"],
            engine_version=head["engine_version"],
            scenario_digest=head["scenario_digest"],
            n_agents=head["n_agents"],
            k=head["k"],
            distance_decay=head["distance_decay"],
            log_tie_tol=head["log_tie_tol"],
            seed=head["seed"],
            max_iterations=head["max_iterations"],
            converged=tail["converged"],
            total_iterations=tail["total_iterations"],
            accepted_updates=tail["accepted_updates"],
            potential_increases=tail["potential_increases"],
            potential_equals=tail["potential_equals"],
            potential_decreases=tail["potential_decreases"],
            final_partition=tuple(tuple(b) for b in tail["final_partition"]),
            metrics=_metrics_from_obj(tail["metrics"]),
        )
        for no, obj in parsed[1:-1]:
            if obj.get("type") != "event":
                raise TraceParseError(f"{path}: line {no}: expected event record")
            record.events.append(_event_from_obj(obj))
    except KeyError as e:
        raise TraceParseError(f"{path}: line {no}: missing field {e}") from e
    return record


# -- sweep results -------------------------------------------------------

_CELL_FIELDS = [
    "x_max",
    "r_max",
    "replications",
    "failures",
    "converged_within_200",
    "num_groups_mean",
    "num_groups_std",
    "mean_group_size_mean",
    "mean_group_size_std",
    "mean_sectors_per_group_mean",
    "mean_sectors_per_group_std",
    "iterations_mean",
    "iterations_std",
    "accepted_updates",
    "potential_decreases",
    "potential_equals",
    "potential_increases",
    "potential_decrease_frac",
]


def save_sweep_csv(result: SweepResult, path: str | Path) -> None:
    buf = io.StringIO()
    buf.write(",".join(_CELL_FIELDS) + "\n")
    for cell in result.cells:
        d = cell.as_dict()
        buf.write(",".join(repr(d[f]) if isinstance(d[f], float) else str(d[f])
                           for f in _CELL_FIELDS) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_sweep_csv(path: str | Path) -> list[dict]:
    import csv

    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        rows = []
        for row in reader:
            out = {}
            for key, val in row.items():
                if key in ("replications", "failures", "converged_within_200",
                           "accepted_updates", "potential_decreases",
                           "potential_equals", "potential_increases"):
                    out[key] = int(val)
                else:
                    out[key] = float(val)
            rows.append(out)
    return rows


def _sweep_payload(result: SweepResult) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "base_seed": result.base_seed,
        "m": result.m,
        "k": result.k,
        "distance_decay": result.distance_decay,
        "integer_resources": result.integer_resources,
        "max_iterations": result.max_iterations,
        "replications": result.replications,
        "x_max_list": list(result.x_max_list),
        "r_max_list": list(result.r_max_list),
        "cells": [c.as_dict() for c in result.cells],
    }


def save_sweep_json(result: SweepResult, path: str | Path) -> None:
    Path(path).write_text(canonical_dumps(_sweep_payload(result)) + "\n",
                          encoding="utf-8")


def load_sweep_json(path: str | Path) -> SweepResult:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    cells = [CellStats(**{k: v for k, v in c.items()}) for c in obj["cells"]]
    return SweepResult(
        x_max_list=tuple(obj["x_max_list"]),
        r_max_list=tuple(obj["r_max_list"]),
        replications=obj["replications"],
        base_seed=obj["base_seed"],
        m=obj["m"],
        k=obj["k"],
        distance_decay=obj["distance_decay"],
        integer_resources=obj["integer_resources"],
        max_iterations=obj["max_iterations"],
        cells=cells,
    )
