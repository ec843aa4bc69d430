"""Random scenario generation, per-equilibrium metrics, and parameter sweeps.

A sweep covers a grid of (location range, resource range) cells, runs many
independently seeded replications per cell, and aggregates group-structure
metrics with count/sum/sum-of-squares accumulators, so results are
identical no matter how the work is scheduled. Seeds are derived per
(cell, replication) with a splittable hash, never by incrementing a base
seed, which keeps every replication reproducible in isolation.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

from .dynamics import SimTrace, Simulation, default_max_iterations
from .model import Agent, GameConfig, Scenario, ValidationError
from .rng import SCENARIO_STREAM, SplitMix64, derive_seed


@dataclass(frozen=True)
class ScenarioParams:
    """Random-initialization knobs: m agents per sector on a square arena."""

    m: int = 5
    k: int = 3
    x_max: float = 10.0
    y_max: float | None = None  # defaults to x_max
    r_max: float = 20.0
    seed: int = 0
    integer_resources: bool = False

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"m must be >= 1, got {self.m}")
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if not (self.x_max > 0):
            raise ValidationError(f"x_max must be > 0, got {self.x_max}")
        if self.y_max is not None and not (self.y_max > 0):
            raise ValidationError(f"y_max must be > 0, got {self.y_max}")
        if self.r_max < 1:
            raise ValidationError(f"r_max must be >= 1, got {self.r_max}")


def generate_scenario(params: ScenarioParams) -> Scenario:
    """Sample an agent table: sectors in blocks of m, positions uniform on
    the arena, resources uniform on [1, r_max].

    Draw order is fixed (per agent: x, y, resource) and the stream is
    domain-separated from the dynamics stream, so a single seed fully
    determines the instance.
    """
    y_max = params.y_max if params.y_max is not None else params.x_max
    rng = SplitMix64(derive_seed(params.seed, SCENARIO_STREAM))
    agents = []
    n = params.m * params.k
    for i in range(n):
        x = rng.uniform(0.0, params.x_max)
        y = rng.uniform(0.0, y_max)
        if params.integer_resources:
            r = float(rng.randint(1, int(math.floor(params.r_max))))
        else:
            r = rng.uniform(1.0, params.r_max)
        agents.append(Agent(id=i, category=i // params.m, resource=r, x=x, y=y))
    return Scenario(
        agents,
        k=params.k,
        provenance={
            "m": params.m,
            "k": params.k,
            "x_max": params.x_max,
            "y_max": y_max,
            "r_max": params.r_max,
            "seed": params.seed,
            "integer_resources": params.integer_resources,
        },
    )


@dataclass(frozen=True)
class EquilibriumMetrics:
    """Structure of one final partition plus how the run got there."""

    num_groups: int
    mean_group_size: float
    mean_sectors_per_group: float
    iterations: int
    converged: bool


def equilibrium_metrics(trace: SimTrace) -> EquilibriumMetrics:
    """Group-structure metrics of a trace's final partition.

    Singletons count as groups; sectors per group counts distinct member
    categories.
    """
    scenario = trace.scenario
    blocks = trace.final.blocks()
    num_groups = len(blocks)
    sectors = 0
    for b in blocks:
        sectors += len({scenario.agents[i].category for i in b})
    return EquilibriumMetrics(
        num_groups=num_groups,
        mean_group_size=scenario.n / num_groups,
        mean_sectors_per_group=sectors / num_groups,
        iterations=trace.total_iterations,
        converged=trace.converged,
    )


@dataclass
class CellStats:
    """Aggregates for one (x_max, r_max) cell over all replications."""

    x_max: float
    r_max: float
    replications: int
    failures: int
    converged_within_200: int
    num_groups_mean: float
    num_groups_std: float
    mean_group_size_mean: float
    mean_group_size_std: float
    mean_sectors_per_group_mean: float
    mean_sectors_per_group_std: float
    iterations_mean: float
    iterations_std: float
    accepted_updates: int
    potential_decreases: int
    potential_equals: int
    potential_increases: int
    potential_decrease_frac: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepResult:
    """Per-cell aggregates over the whole grid, row-major in x_max."""

    x_max_list: tuple[float, ...]
    r_max_list: tuple[float, ...]
    replications: int
    base_seed: int
    m: int
    k: int
    distance_decay: float
    integer_resources: bool
    max_iterations: int
    cells: list[CellStats]

    def cell(self, x_max: float, r_max: float) -> CellStats:
        for c in self.cells:
            if c.x_max == x_max and c.r_max == r_max:
                return c
        raise KeyError((x_max, r_max))


class _Accumulator:
    """Count/sum/sum-of-squares; mean and population std."""

    __slots__ = ("n", "s", "ss")

    def __init__(self):
        self.n = 0
        self.s = 0.0
        self.ss = 0.0

    def add(self, v: float) -> None:
        self.n += 1
        self.s += v
        self.ss += v * v

    def mean(self) -> float:
        return self.s / self.n

    def std(self) -> float:
        var = self.ss / self.n - (self.s / self.n) ** 2
        return math.sqrt(var) if var > 0 else 0.0


def replication_seed(base_seed: int, x_index: int, r_index: int, rep: int) -> int:
    """Seed of one replication; splittable, so any cell/rep reruns alone."""
    return derive_seed(base_seed, x_index, r_index, rep)


def _run_cell(args: tuple) -> CellStats:
    (x_index, x_max, r_index, r_max, replications, base_seed, m, k,
     distance_decay, integer_resources, max_iterations) = args
    cfg = GameConfig(k=k, distance_decay=distance_decay)
    acc = {name: _Accumulator() for name in
           ("num_groups", "mean_group_size", "mean_sectors_per_group", "iterations")}
    failures = 0
    within_200 = 0
    accepted = 0
    decreases = 0
    equals = 0
    increases = 0
    for rep in range(replications):
        seed = replication_seed(base_seed, x_index, r_index, rep)
        scenario = generate_scenario(ScenarioParams(
            m=m, k=k, x_max=x_max, r_max=r_max, seed=seed,
            integer_resources=integer_resources,
        ))
        sim = Simulation(scenario, cfg, seed=seed, max_iterations=max_iterations,
                         record_events=False)
        trace = sim.run()
        metrics = equilibrium_metrics(trace)
        acc["num_groups"].add(metrics.num_groups)
        acc["mean_group_size"].add(metrics.mean_group_size)
        acc["mean_sectors_per_group"].add(metrics.mean_sectors_per_group)
        acc["iterations"].add(metrics.iterations)
        if not trace.converged:
            failures += 1
        elif trace.total_iterations <= 200:
            within_200 += 1
        accepted += trace.accepted_updates
        decreases += trace.potential_decreases
        equals += trace.potential_equals
        increases += trace.potential_increases
    return CellStats(
        x_max=x_max,
        r_max=r_max,
        replications=replications,
        failures=failures,
        converged_within_200=within_200,
        num_groups_mean=acc["num_groups"].mean(),
        num_groups_std=acc["num_groups"].std(),
        mean_group_size_mean=acc["mean_group_size"].mean(),
        mean_group_size_std=acc["mean_group_size"].std(),
        mean_sectors_per_group_mean=acc["mean_sectors_per_group"].mean(),
        mean_sectors_per_group_std=acc["mean_sectors_per_group"].std(),
        iterations_mean=acc["iterations"].mean(),
        iterations_std=acc["iterations"].std(),
        accepted_updates=accepted,
        potential_decreases=decreases,
        potential_equals=equals,
        potential_increases=increases,
        potential_decrease_frac=(decreases / accepted) if accepted else 0.0,
    )


DEFAULT_X_MAX_GRID = (1.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0)
DEFAULT_R_MAX_GRID = (1.0, 20.0, 40.0, 60.0, 80.0, 100.0)


def run_sweep(x_max_list=DEFAULT_X_MAX_GRID, r_max_list=DEFAULT_R_MAX_GRID,
              replications: int = 200, base_seed: int = 0, m: int = 5, k: int = 3,
              distance_decay: float = 1.0, integer_resources: bool = False,
              max_iterations: int | None = None, workers: int = 1) -> SweepResult:
    """Run the full grid; schedule-independent because every replication is
    independently seeded and aggregation is commutative."""
    if not x_max_list or not r_max_list:
        raise ValidationError("x_max_list and r_max_list must be nonempty")
    if replications < 1:
        raise ValidationError("replications must be >= 1")
    if max_iterations is None:
        max_iterations = default_max_iterations(m * k)
    jobs = [
        (xi, float(x_max), ri, float(r_max), replications, base_seed, m, k,
         distance_decay, integer_resources, max_iterations)
        for xi, x_max in enumerate(x_max_list)
        for ri, r_max in enumerate(r_max_list)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, jobs))
    else:
        cells = [_run_cell(j) for j in jobs]
    return SweepResult(
        x_max_list=tuple(float(x) for x in x_max_list),
        r_max_list=tuple(float(r) for r in r_max_list),
        replications=replications,
        base_seed=base_seed,
        m=m,
        k=k,
        distance_decay=distance_decay,
        integer_resources=integer_resources,
        max_iterations=max_iterations,
        cells=cells,
    )


def _spearman(xs, ys) -> float | None:
    """Spearman rank correlation; None when either series is degenerate."""
    if len(xs) < 2 or len(set(xs)) < 2 or len(set(ys)) < 2:
        return None
    from scipy.stats import spearmanr

    rho = spearmanr(xs, ys).statistic
    return None if math.isnan(rho) else float(rho)


@dataclass
class TrendReport:
    """Rank-correlation summary of a sweep's monotone structure."""

    rows: list[dict]
    columns: list[dict]
    sectors_vs_size: float | None

    def as_dict(self) -> dict:
        return {
            "rows": self.rows,
            "columns": self.columns,
            "sectors_vs_size": self.sectors_vs_size,
        }


def trend_checks(result: SweepResult) -> TrendReport:
    """Directional checks: bigger resource ranges should grow groups along
    each row, bigger arenas should fragment them along each column, and
    sector diversity should track group size across all cells.

    Degenerate series yield None (undefined), never a failure.
    """
    rows = []
    for x_max in result.x_max_list:
        cells = [result.cell(x_max, r) for r in result.r_max_list]
        rho = _spearman(list(result.r_max_list),
                        [c.mean_group_size_mean for c in cells])
        rows.append({"x_max": x_max, "spearman_group_size_vs_r_max": rho})
    columns = []
    for r_max in result.r_max_list:
        cells = [result.cell(x, r_max) for x in result.x_max_list]
        rho = _spearman(list(result.x_max_list),
                        [c.num_groups_mean for c in cells])
        columns.append({"r_max": r_max, "spearman_num_groups_vs_x_max": rho})
    sizes = [c.mean_group_size_mean for c in result.cells]
    sectors = [c.mean_sectors_per_group_mean for c in result.cells]
    return TrendReport(
        rows=rows,
        columns=columns,
        sectors_vs_size=_spearman(sizes, sectors),
    )
