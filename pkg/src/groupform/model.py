"""Domain types and closed-form group evaluation for the spatial group-formation game.

Agents are organizations with a sector (category), a scalar resource held
exclusively in that sector, and a 2D location. A group pools its members'
resources, earns a diversity boost for spanning several sectors, and pays
an exponential penalty on its total pairwise member distance. Every member
of a group receives the group's utility.

All utility comparisons made by the dynamics engine and the brute-force
oracle run in log space: with location ranges up to 100 the distance term
drives plain utilities below double-precision underflow, while the log form
preserves the ordering exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

# Two log utilities whose difference is at most this are treated as equal.
# Strict improvement and weak no-harm tests below share this tolerance, so
# the engine and the oracle agree on admissibility decisions bit-for-bit.
LOG_TIE_TOL = 1e-9


class ValidationError(ValueError):
    """An agent table, configuration, or partition violates an invariant."""


class EmptyScenarioError(ValidationError):
    pass


class DuplicateAgentIdError(ValidationError):
    pass


class NonDenseIdError(ValidationError):
    pass


class CategoryRangeError(ValidationError):
    pass


class NonPositiveResourceError(ValidationError):
    pass


class UnknownAgentError(KeyError):
    """Lookup of an agent id that is not in the table."""


class PartitionError(ValidationError):
    pass


@dataclass(frozen=True)
class GameConfig:
    """Utility-function parameters: sector count and distance decay rate.

    distance_decay scales the exponential spatial penalty; 1.0 is the
    canonical setting and other values support sensitivity runs.
    """

    k: int = 3
    distance_decay: float = 1.0

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if not (self.distance_decay > 0 and math.isfinite(self.distance_decay)):
            raise ValidationError(
                f"distance_decay must be a positive finite real, got {self.distance_decay}"
            )


@dataclass(frozen=True)
class Agent:
    """One organization: id, sector category, scalar resource, 2D position."""

    id: int
    category: int
    resource: float
    x: float
    y: float


class Scenario:
    """Validated agent table with a fixed sector count k.

    Ids must be unique and dense from 0, categories in [0, k), resources
    strictly positive. Instances are immutable value data once built.
    """

    __slots__ = ("agents", "k", "provenance")

    def __init__(self, agents: Sequence[Agent], k: int, provenance: dict | None = None):
        if k < 2:
            raise ValidationError(f"k must be >= 2, got {k}")
        agents = tuple(sorted(agents, key=lambda a: a.id))
        if not agents:
            raise EmptyScenarioError("scenario has no agents")
        seen = set()
        for a in agents:
            if a.id in seen:
                raise DuplicateAgentIdError(f"duplicate agent id {a.id}")
            seen.add(a.id)
            if not (0 <= a.category < k):
                raise CategoryRangeError(
                    f"agent {a.id}: category {a.category} outside [0, {k})"
                )
            if not (a.resource > 0 and math.isfinite(a.resource)):
                raise NonPositiveResourceError(
                    f"agent {a.id}: resource must be > 0, got {a.resource}"
                )
            if not (math.isfinite(a.x) and math.isfinite(a.y)):
                raise ValidationError(f"agent {a.id}: non-finite position")
        if [a.id for a in agents] != list(range(len(agents))):
            raise NonDenseIdError("agent ids must be dense 0..n-1")
        self.agents = agents
        self.k = k
        self.provenance = dict(provenance) if provenance else None

    @property
    def n(self) -> int:
        return len(self.agents)

    def agent(self, agent_id: int) -> Agent:
        if not (0 <= agent_id < len(self.agents)):
            raise UnknownAgentError(agent_id)
        return self.agents[agent_id]

    def __iter__(self):
        return iter(self.agents)

    def __eq__(self, other):
        return (
            isinstance(other, Scenario)
            and self.k == other.k
            and self.agents == other.agents
        )

    def __repr__(self):
        return f"Scenario(n={self.n}, k={self.k})"


class Partition:
    """Disjoint cover of the agent set by nonempty groups.

    Group indices are stable handles: once a group dissolves its index is
    never reused within a run, so trace events are unambiguous. Instances
    are treated as immutable values; the dynamics engine keeps its own
    internal bookkeeping and materializes snapshots on demand.
    """

    __slots__ = ("groups", "membership", "next_index")

    def __init__(self, groups: dict[int, frozenset[int]], next_index: int | None = None):
        self.groups = {idx: frozenset(members) for idx, members in groups.items()}
        self.membership = {}
        for idx, members in self.groups.items():
            for a in members:
                self.membership[a] = idx
        if next_index is None:
            next_index = max(self.groups, default=-1) + 1
        self.next_index = next_index

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls({i: frozenset((i,)) for i in range(n)}, next_index=n)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "Partition":
        return cls({i: frozenset(b) for i, b in enumerate(blocks)})

    def group_of(self, agent_id: int) -> int:
        try:
            return self.membership[agent_id]
        except KeyError:
            raise UnknownAgentError(agent_id) from None

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Canonical form: members sorted, blocks ordered by smallest member."""
        return tuple(sorted((tuple(sorted(m)) for m in self.groups.values())))

    def validate(self, n_agents: int) -> None:
        """Check the disjoint-cover and membership-consistency invariants."""
        seen: set[int] = set()
        for idx, members in self.groups.items():
            if not members:
                raise PartitionError(f"group {idx} is empty")
            for a in members:
                if a in seen:
                    raise PartitionError(f"agent {a} appears in more than one group")
                seen.add(a)
        if seen != set(range(n_agents)):
            raise PartitionError(
                f"groups cover {sorted(seen)} but the agent set is 0..{n_agents - 1}"
            )
        if len(self.membership) != n_agents:
            raise PartitionError("membership map size mismatch")
        for a, idx in self.membership.items():
            if a not in self.groups.get(idx, frozenset()):
                raise PartitionError(f"membership map points agent {a} at group {idx}")

    def __eq__(self, other):
        return isinstance(other, Partition) and self.blocks() == other.blocks()

    def __hash__(self):
        return hash(self.blocks())

    def __repr__(self):
        return f"Partition({list(self.blocks())!r})"


def euclidean(ax: float, ay: float, bx: float, by: float) -> float:
    # sqrt of an explicit sum of squares: IEEE-correctly-rounded everywhere,
    # unlike some libm hypot implementations.
    dx = ax - bx
    dy = ay - by
    return math.sqrt(dx * dx + dy * dy)


def distance_matrix(scenario: Scenario) -> list[list[float]]:
    """Dense pairwise Euclidean distances, indexed by agent id."""
    n = scenario.n
    agents = scenario.agents
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        ai = agents[i]
        row = d[i]
        for j in range(i + 1, n):
            aj = agents[j]
            v = euclidean(ai.x, ai.y, aj.x, aj.y)
            row[j] = v
            d[j][i] = v
    return d


def category_totals(group: Iterable[int], scenario: Scenario, k: int | None = None) -> list[float]:
    """Per-sector resource sums over the group's members.

    Members are accumulated in sorted id order so results are bit-stable
    regardless of the caller's iteration order.
    """
    if k is None:
        k = scenario.k
    members = sorted(group)
    if not members:
        raise ValidationError("group must be nonempty")
    totals = [0.0] * k
    for i in members:
        a = scenario.agent(i)
        totals[a.category] += a.resource
    return totals


def boosting_factor(totals: Sequence[float]) -> float:
    """Diversity multiplier: 1 plus pairwise products of sector totals over their sum.

    Equals 1 exactly when a single sector holds all the resources; grows with
    the balance and number of sectors present. Defined for any k >= 2 by
    summing all unordered sector pairs.
    """
    s1 = 0.0
    s2 = 0.0
    acc = 0.0  # running sum of earlier entries, so s2 = sum_{i<j} t_i * t_j
    for t in totals:
        s2 += t * acc
        acc += t
        s1 += t
    if s1 <= 0.0:
        raise ValueError("boosting factor undefined: all sector totals are zero")
    return 1.0 + s2 / s1


def _sum_and_pairsum(totals: Sequence[float]) -> tuple[float, float]:
    s1 = 0.0
    s2 = 0.0
    acc = 0.0
    for t in totals:
        s2 += t * acc
        acc += t
        s1 += t
    return s1, s2


def group_resource(group: Iterable[int], scenario: Scenario, k: int | None = None) -> float:
    """Pooled group resource: raw sector totals scaled by the diversity boost."""
    totals = category_totals(group, scenario, k)
    return sum(totals) * boosting_factor(totals)


def group_distance(group: Iterable[int], scenario: Scenario) -> float:
    """Total Euclidean distance over all unordered member pairs; 0 for singletons."""
    members = sorted(group)
    if not members:
        raise ValidationError("group must be nonempty")
    total = 0.0
    for i, a in enumerate(members):
        ag_a = scenario.agent(a)
        for b in members[i + 1 :]:
            ag_b = scenario.agent(b)
            total += euclidean(ag_a.x, ag_a.y, ag_b.x, ag_b.y)
    return total


def group_utility(group: Iterable[int], scenario: Scenario, cfg: GameConfig) -> float:
    """Group utility: pooled resource decayed exponentially with group spread.

    Shared identically by every member. Can underflow to 0.0 for very spread
    groups; ordering-sensitive callers must use log_group_utility instead.
    """
    r = group_resource(group, scenario, cfg.k)
    d = group_distance(group, scenario)
    return r * math.exp(-cfg.distance_decay * d)


def log_group_utility(group: Iterable[int], scenario: Scenario, cfg: GameConfig) -> float:
    """ln(group utility), computed without forming the underflow-prone product."""
    totals = category_totals(group, scenario, cfg.k)
    s1, s2 = _sum_and_pairsum(totals)
    d = group_distance(group, scenario)
    return math.log(s1 + s2) - cfg.distance_decay * d


def log_equal(a: float, b: float) -> bool:
    return abs(a - b) <= LOG_TIE_TOL


def log_improves(new: float, old: float) -> bool:
    """Strict improvement beyond the tie tolerance."""
    return new - old > LOG_TIE_TOL


def log_not_harmed(new: float, old: float) -> bool:
    """Weak no-harm test: new may drop below old by at most the tie tolerance."""
    return new - old >= -LOG_TIE_TOL
