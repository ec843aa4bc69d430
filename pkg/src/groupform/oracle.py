"""Brute-force ground truth for small instances.

verify_ise re-derives every agent's admissible deviations from scratch
(bitmask subsets with memoized log utilities) without touching the engine's
option enumeration: the duplicated logic is deliberate, so the two
implementations cross-check each other. enumerate_all_ise walks every set
partition of the agents in restricted-growth-string order and keeps the
individually stable ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from .model import (
    GameConfig,
    Partition,
    Scenario,
    distance_matrix,
    log_improves,
    log_not_harmed,
)
from .dynamics import FORM_SINGLETON, JOIN, MoveOption


@dataclass
class IseReport:
    """Outcome of a stability check: stable, or a list of witnessed deviations."""

    is_ise: bool
    violations: list[tuple[int, MoveOption]] = field(default_factory=list)


class _LogUtilityTable:
    """Memoized log utility per member subset, keyed by bitmask."""

    def __init__(self, scenario: Scenario, cfg: GameConfig):
        self.lam = cfg.distance_decay
        self.k = cfg.k
        self.res = [a.resource for a in scenario.agents]
        self.cat = [a.category for a in scenario.agents]
        self.dist = distance_matrix(scenario)
        self.cache: dict[int, float] = {}

    def members(self, mask: int) -> list[int]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(i)
            mask >>= 1
            i += 1
        return out

    def log_u(self, mask: int) -> float:
        v = self.cache.get(mask)
        if v is not None:
            return v
        members = self.members(mask)
        totals = [0.0] * self.k
        for i in members:
            totals[self.cat[i]] += self.res[i]
        s1 = 0.0
        s2 = 0.0
        acc = 0.0
        for t in totals:
            s2 += t * acc
            acc += t
            s1 += t
        d = 0.0
        for idx, i in enumerate(members):
            row = self.dist[i]
            for j in members[idx + 1 :]:
                d += row[j]
        v = math.log(s1 + s2) - self.lam * d
        self.cache[mask] = v
        return v


def _collect_violations(masks: list[int], table: _LogUtilityTable, n: int,
                        group_index: dict[int, int] | None,
                        stop_at_first: bool) -> list[tuple[int, MoveOption]]:
    """Admissible deviations from the partition given as a list of block masks.

    group_index maps a block mask to the partition's stable group index for
    reporting; enumeration callers pass None and get positional indices.
    """
    violations: list[tuple[int, MoveOption]] = []
    of_agent = {}
    for m in masks:
        for i in table.members(m):
            of_agent[i] = m
    for i in range(n):
        bit = 1 << i
        cur_mask = of_agent[i]
        cur_log = table.log_u(cur_mask)
        if cur_mask != bit:
            solo_log = math.log(table.res[i])
            if log_improves(solo_log, cur_log):
                violations.append((i, MoveOption(FORM_SINGLETON, None, solo_log)))
                if stop_at_first:
                    return violations
        for pos, m in enumerate(masks):
            if m == cur_mask:
                continue
            old_log = table.log_u(m)
            new_log = table.log_u(m | bit)
            if log_improves(new_log, cur_log) and log_not_harmed(new_log, old_log):
                idx = group_index[m] if group_index is not None else pos
                violations.append((i, MoveOption(JOIN, idx, new_log, old_log, new_log)))
                if stop_at_first:
                    return violations
    return violations


def verify_ise(partition: Partition, scenario: Scenario, cfg: GameConfig | None = None,
               first_violation_only: bool = False) -> IseReport:
    """Exhaustively check that no agent has an admissible deviation.

    Reports every violation (agent plus the deviating move) unless asked to
    stop at the first one.
    """
    cfg = cfg if cfg is not None else GameConfig(k=scenario.k)
    partition.validate(scenario.n)
    table = _LogUtilityTable(scenario, cfg)
    masks = []
    group_index = {}
    for idx in sorted(partition.groups):
        mask = 0
        for i in partition.groups[idx]:
            mask |= 1 << i
        masks.append(mask)
        group_index[mask] = idx
    violations = _collect_violations(masks, table, scenario.n, group_index,
                                     first_violation_only)
    return IseReport(is_ise=not violations, violations=violations)


def iter_set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of {0..n-1} as restricted growth strings,
    in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    m = [0] * n  # m[j] = max(a[0..j])
    while True:
        yield tuple(a)
        j = n - 1
        while j > 0 and a[j] == m[j - 1] + 1:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        mj = m[j - 1]
        m[j] = mj if mj >= a[j] else a[j]
        for i in range(j + 1, n):
            a[i] = 0
            m[i] = m[j]


def rgs_to_blocks(rgs: tuple[int, ...]) -> list[list[int]]:
    blocks: list[list[int]] = [[] for _ in range(max(rgs) + 1)]
    for agent, b in enumerate(rgs):
        blocks[b].append(agent)
    return blocks


MAX_ENUMERATION_AGENTS = 12  # Bell(12) ~ 4.2e6 partitions; beyond that, refuse


def enumerate_all_ise(scenario: Scenario, cfg: GameConfig | None = None) -> list[Partition]:
    """Every individually stable partition, in restricted-growth-string order.

    Bounded to small agent sets; the result is provably nonempty for this
    game, which the test suite leans on.
    """
    n = scenario.n
    if n > MAX_ENUMERATION_AGENTS:
        raise ValueError(
            f"exhaustive enumeration is limited to n <= {MAX_ENUMERATION_AGENTS}, got {n}"
        )
    cfg = cfg if cfg is not None else GameConfig(k=scenario.k)
    table = _LogUtilityTable(scenario, cfg)
    out: list[Partition] = []
    for rgs in iter_set_partitions(n):
        blocks = rgs_to_blocks(rgs)
        masks = []
        for b in blocks:
            mask = 0
            for i in b:
                mask |= 1 << i
            masks.append(mask)
        if not _collect_violations(masks, table, n, None, stop_at_first=True):
            out.append(Partition.from_blocks(blocks))
    return out
