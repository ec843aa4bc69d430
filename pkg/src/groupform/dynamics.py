"""Asynchronous improvement dynamics from singletons to a stable partition.

One run repeatedly draws an agent uniformly from the "remaining" set (the
agents that may still have an improving move), lets it take its best
admissible move, and tracks convergence: an accepted move resets the
remaining set to all agents, a fruitless attempt removes the agent from it.
An empty remaining set means no agent can improve by joining a group that
would accept it or by going solo, i.e. the partition is individually stable.

Admissibility is asymmetric by design: the mover must strictly improve, the
receiving group must not be harmed (weak inequality), and the abandoned
group has no veto. Among several admissible moves the engine takes the one
with the highest post-move log utility for the mover, breaking ties in
favor of joins over going solo and then by lowest target group index, so a
(scenario, seed) pair always reproduces the identical trace.

The sorted vector of all agents' log utilities is recorded after every
event as a convergence diagnostic; each accepted update also logs whether
that vector lexicographically increased, stayed equal, or decreased
relative to the previous accepted update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .model import (
    GameConfig,
    LOG_TIE_TOL,
    Partition,
    Scenario,
    ValidationError,
    _sum_and_pairsum,
    category_totals,
    distance_matrix,
    group_distance,
    log_group_utility,
    log_improves,
    log_not_harmed,
)
from .rng import DYNAMICS_STREAM, SplitMix64, derive_seed

JOIN = "join"
FORM_SINGLETON = "singleton"
STAY = "stay"

_KIND_RANK = {JOIN: 0, FORM_SINGLETON: 1}  # joins win ties; going solo is last resort

POTENTIAL_INCREASE = "increase"
POTENTIAL_EQUAL = "equal"
POTENTIAL_DECREASE = "decrease"


class StateError(RuntimeError):
    """The engine was driven past convergence (empty remaining set)."""


@dataclass(frozen=True, slots=True)
class MoveOption:
    """One candidate move, annotated with the log utilities that decide it.

    For joins, the mover's new log utility and the target's new log utility
    coincide (utilities are shared group-wide); both are recorded so traces
    are self-explanatory.
    """

    kind: str
    target: Optional[int]  # target group index for joins, else None
    mover_new_log_utility: float
    target_old_log_utility: Optional[float] = None
    target_new_log_utility: Optional[float] = None


@dataclass(frozen=True, slots=True)
class UpdateEvent:
    """One attempted update: which agent was drawn and what it did."""

    iteration: int
    agent: int
    attempted: bool
    accepted_move: Optional[MoveOption]
    new_group: Optional[int]  # stable index of a group created by going solo
    remaining_after: int
    potential_after: tuple[float, ...]
    potential_cmp: Optional[str]  # vs previous accepted update; None on no-ops


@dataclass
class SimTrace:
    """Full record of one run: every event plus the final partition."""

    scenario: Scenario
    cfg: GameConfig
    seed: int
    max_iterations: int
    events: list[UpdateEvent]
    final: Partition
    converged: bool
    total_iterations: int
    accepted_updates: int
    potential_increases: int
    potential_equals: int
    potential_decreases: int


def default_max_iterations(n: int) -> int:
    """Generous attempt budget: an order of magnitude above observed needs."""
    return 10 * n * (n + 1)


class _GroupState:
    """Cached evaluation of one live group: totals, pair sum, spread, log utility."""

    __slots__ = ("members", "totals", "s1", "s2", "dist_sum", "log_u")

    def __init__(self, members: list[int], scenario: Scenario, cfg: GameConfig,
                 dist: list[list[float]]):
        members.sort()
        self.members = members
        totals = [0.0] * cfg.k
        for i in members:
            a = scenario.agents[i]
            totals[a.category] += a.resource
        self.totals = totals
        self.s1, self.s2 = _sum_and_pairsum(totals)
        d = 0.0
        for idx, i in enumerate(members):
            row = dist[i]
            for j in members[idx + 1 :]:
                d += row[j]
        self.dist_sum = d
        self.log_u = math.log(self.s1 + self.s2) - cfg.distance_decay * d


class Simulation:
    """Live state of one run; step() drives it one attempted update at a time."""

    def __init__(self, scenario: Scenario, cfg: GameConfig | None = None, seed: int = 0,
                 max_iterations: int | None = None, record_events: bool = True,
                 check_invariants: bool = False,
                 initial_blocks: list[list[int]] | None = None):
        cfg = cfg if cfg is not None else GameConfig(k=scenario.k)
        if cfg.k != scenario.k:
            raise ValidationError(
                f"config k={cfg.k} does not match scenario k={scenario.k}"
            )
        self.scenario = scenario
        self.cfg = cfg
        self.seed = seed
        self.max_iterations = (
            max_iterations if max_iterations is not None
            else default_max_iterations(scenario.n)
        )
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        self.record_events = record_events
        self.check_invariants = check_invariants
        self.rng = SplitMix64(derive_seed(seed, DYNAMICS_STREAM))
        self.dist = distance_matrix(scenario)
        n = scenario.n
        if initial_blocks is None:
            # canonical start: every agent in its own group, index = agent id
            self.groups: dict[int, _GroupState] = {
                i: _GroupState([i], scenario, cfg, self.dist) for i in range(n)
            }
            self.member_group: list[int] = list(range(n))
            self.next_index = n
        else:
            start = Partition.from_blocks(initial_blocks)
            start.validate(n)
            self.groups = {
                idx: _GroupState(sorted(start.groups[idx]), scenario, cfg, self.dist)
                for idx in sorted(start.groups)
            }
            self.member_group = [start.group_of(i) for i in range(n)]
            self.next_index = start.next_index
        self.remaining: list[int] = list(range(n))
        self.events: list[UpdateEvent] = []
        self.iteration = 0
        self.accepted_updates = 0
        self.potential_increases = 0
        self.potential_equals = 0
        self.potential_decreases = 0
        self._last_potential = self._potential()

    # -- inspection ------------------------------------------------------

    def partition_snapshot(self) -> Partition:
        return Partition(
            {idx: frozenset(gs.members) for idx, gs in self.groups.items()},
            next_index=self.next_index,
        )

    def _potential(self) -> tuple[float, ...]:
        vals: list[float] = []
        for gs in self.groups.values():
            vals.extend([gs.log_u] * len(gs.members))
        vals.sort(reverse=True)
        return tuple(vals)

    # -- option evaluation -----------------------------------------------

    def options_for(self, agent_id: int) -> list[MoveOption]:
        """All candidate moves for one agent: joins in group-index order,
        then going solo (if not already solo), then staying put."""
        scenario = self.scenario
        a = scenario.agent(agent_id)
        cur_idx = self.member_group[agent_id]
        cur = self.groups[cur_idx]
        lam = self.cfg.distance_decay
        row = self.dist[agent_id]
        out: list[MoveOption] = []
        for gidx, gs in self.groups.items():
            if gidx == cur_idx:
                continue
            s1n = gs.s1 + a.resource
            s2n = gs.s2 + a.resource * (gs.s1 - gs.totals[a.category])
            dn = gs.dist_sum
            for j in gs.members:
                dn += row[j]
            new_log = math.log(s1n + s2n) - lam * dn
            out.append(MoveOption(JOIN, gidx, new_log, gs.log_u, new_log))
        if len(cur.members) >= 2:
            out.append(MoveOption(FORM_SINGLETON, None, math.log(a.resource)))
        out.append(MoveOption(STAY, None, cur.log_u))
        return out

    def _best_admissible(self, agent_id: int) -> Optional[MoveOption]:
        cur_log = self.groups[self.member_group[agent_id]].log_u
        best: Optional[MoveOption] = None
        best_log = -math.inf
        candidates: list[MoveOption] = []
        for opt in self.options_for(agent_id):
            if not admissible(opt, cur_log):
                continue
            candidates.append(opt)
            if opt.mover_new_log_utility > best_log:
                best_log = opt.mover_new_log_utility
        if not candidates:
            return None
        for opt in candidates:
            if opt.mover_new_log_utility < best_log - LOG_TIE_TOL:
                continue
            if best is None:
                best = opt
                continue
            key_new = (_KIND_RANK[opt.kind], opt.target if opt.target is not None else -1)
            key_best = (_KIND_RANK[best.kind], best.target if best.target is not None else -1)
            if key_new < key_best:
                best = opt
        return best

    # -- state mutation ----------------------------------------------------

    def _rebuild(self, idx: int, members: list[int]) -> None:
        self.groups[idx] = _GroupState(members, self.scenario, self.cfg, self.dist)

    def _remove_from_group(self, agent_id: int) -> None:
        old_idx = self.member_group[agent_id]
        old_members = [m for m in self.groups[old_idx].members if m != agent_id]
        if old_members:
            self._rebuild(old_idx, old_members)
        else:
            del self.groups[old_idx]  # dissolved; index is never reused

    def _apply(self, agent_id: int, move: MoveOption) -> Optional[int]:
        self._remove_from_group(agent_id)
        if move.kind == JOIN:
            target = self.groups[move.target]
            self._rebuild(move.target, target.members + [agent_id])
            self.member_group[agent_id] = move.target
            return None
        new_idx = self.next_index
        self.next_index += 1
        self._rebuild(new_idx, [agent_id])
        self.member_group[agent_id] = new_idx
        return new_idx

    # -- driving -----------------------------------------------------------

    def step(self) -> UpdateEvent:
        """Draw one agent and attempt an update; returns the emitted event."""
        if not self.remaining:
            raise StateError("remaining agent set is empty; the run has converged")
        self.iteration += 1
        pos = self.rng.randrange(len(self.remaining))
        agent_id = self.remaining[pos]
        move = self._best_admissible(agent_id)
        if move is None:
            self.remaining.pop(pos)
            event = UpdateEvent(
                iteration=self.iteration,
                agent=agent_id,
                attempted=True,
                accepted_move=None,
                new_group=None,
                remaining_after=len(self.remaining),
                potential_after=self._last_potential,
                potential_cmp=None,
            )
        else:
            new_group = self._apply(agent_id, move)
            self.remaining = list(range(self.scenario.n))
            potential = self._potential()
            cmp = _lex_compare(self._last_potential, potential)
            self._last_potential = potential
            self.accepted_updates += 1
            if cmp == POTENTIAL_INCREASE:
                self.potential_increases += 1
            elif cmp == POTENTIAL_EQUAL:
                self.potential_equals += 1
            else:
                self.potential_decreases += 1
            event = UpdateEvent(
                iteration=self.iteration,
                agent=agent_id,
                attempted=True,
                accepted_move=move,
                new_group=new_group,
                remaining_after=len(self.remaining),
                potential_after=potential,
                potential_cmp=cmp,
            )
        if self.check_invariants:
            self.partition_snapshot().validate(self.scenario.n)
        if self.record_events:
            self.events.append(event)
        return event

    def run(self) -> SimTrace:
        while self.remaining and self.iteration < self.max_iterations:
            self.step()
        return SimTrace(
            scenario=self.scenario,
            cfg=self.cfg,
            seed=self.seed,
            max_iterations=self.max_iterations,
            events=self.events,
            final=self.partition_snapshot(),
            converged=not self.remaining,
            total_iterations=self.iteration,
            accepted_updates=self.accepted_updates,
            potential_increases=self.potential_increases,
            potential_equals=self.potential_equals,
            potential_decreases=self.potential_decreases,
        )


def _lex_compare(prev: tuple[float, ...], new: tuple[float, ...]) -> str:
    """Lexicographic comparison of two descending utility vectors.

    Entries within the tie tolerance of each other are treated as equal, so
    last-ulp noise is never reported as a potential change.
    """
    for a, b in zip(prev, new):
        if abs(b - a) <= LOG_TIE_TOL:
            continue
        return POTENTIAL_INCREASE if b > a else POTENTIAL_DECREASE
    return POTENTIAL_EQUAL


def admissible(move: MoveOption, current_log_utility: float) -> bool:
    """Whether a move may actually be taken.

    Joins need a strict gain for the mover and may not harm the target
    group; going solo needs a strict gain; staying put is the fallback and
    never counts as admissible.
    """
    if move.kind == JOIN:
        return log_improves(move.mover_new_log_utility, current_log_utility) and (
            log_not_harmed(move.target_new_log_utility, move.target_old_log_utility)
        )
    if move.kind == FORM_SINGLETON:
        return log_improves(move.mover_new_log_utility, current_log_utility)
    return False


def enumerate_options(agent_id: int, partition: Partition, scenario: Scenario,
                      cfg: GameConfig) -> list[MoveOption]:
    """Candidate moves for an agent in an arbitrary partition.

    Convenience form of Simulation.options_for for callers that hold a bare
    partition; annotations carry the same log utilities the engine uses.
    """
    cur_idx = partition.group_of(agent_id)
    cur_members = partition.groups[cur_idx]
    cur_log = log_group_utility(cur_members, scenario, cfg)
    a = scenario.agent(agent_id)
    out: list[MoveOption] = []
    for gidx in sorted(partition.groups):
        if gidx == cur_idx:
            continue
        members = partition.groups[gidx]
        old_log = log_group_utility(members, scenario, cfg)
        new_log = log_group_utility(members | {agent_id}, scenario, cfg)
        out.append(MoveOption(JOIN, gidx, new_log, old_log, new_log))
    if len(cur_members) >= 2:
        out.append(MoveOption(FORM_SINGLETON, None, math.log(a.resource)))
    out.append(MoveOption(STAY, None, cur_log))
    return out


def potential_vector(partition: Partition, scenario: Scenario,
                     cfg: GameConfig) -> tuple[float, ...]:
    """All agents' log utilities, sorted descending."""
    vals: list[float] = []
    for members in partition.groups.values():
        u = log_group_utility(members, scenario, cfg)
        vals.extend([u] * len(members))
    vals.sort(reverse=True)
    return tuple(vals)


def run_to_convergence(scenario: Scenario, cfg: GameConfig | None = None, seed: int = 0,
                       max_iterations: int | None = None,
                       record_events: bool = True) -> SimTrace:
    """Run the improvement dynamics from the all-singletons start.

    Returns a trace whose final partition is individually stable whenever
    converged is True; hitting the attempt budget is reported in the trace,
    never raised.
    """
    sim = Simulation(scenario, cfg, seed=seed, max_iterations=max_iterations,
                     record_events=record_events)
    return sim.run()
