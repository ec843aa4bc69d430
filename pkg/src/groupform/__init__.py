"""Spatial group-formation game toolkit.

Heterogeneous agents (distinct sectors, sector-exclusive resources, 2D
locations) form groups whose utility rewards pooled resources and sector
diversity and decays with spatial spread. The package simulates the
asynchronous improvement dynamics to an individually stable partition,
verifies stability by brute force on small instances, sweeps parameter
grids, persists byte-stable traces, and renders SVG storyboards.
"""

from .estimator import GroupFormation
from .dynamics import (
    MoveOption,
    SimTrace,
    Simulation,
    UpdateEvent,
    admissible,
    enumerate_options,
    potential_vector,
    run_to_convergence,
)
from .experiments import (
    EquilibriumMetrics,
    ScenarioParams,
    SweepResult,
    equilibrium_metrics,
    generate_scenario,
    run_sweep,
    trend_checks,
)
from .model import (
    Agent,
    GameConfig,
    Partition,
    Scenario,
    boosting_factor,
    category_totals,
    group_distance,
    group_resource,
    group_utility,
    log_group_utility,
)
from .oracle import IseReport, enumerate_all_ise, verify_ise
from .persistence import (
    ENGINE_VERSION as __version__,
    load_demo_scenario,
    load_scenario,
    load_trace,
    save_scenario,
    save_trace,
    scenario_digest,
)

__all__ = [
    "Agent",
    "EquilibriumMetrics",
    "GameConfig",
    "GroupFormation",
    "IseReport",
    "MoveOption",
    "Partition",
    "Scenario",
    "ScenarioParams",
    "SimTrace",
    "Simulation",
    "SweepResult",
    "UpdateEvent",
    "admissible",
    "boosting_factor",
    "category_totals",
    "enumerate_all_ise",
    "enumerate_options",
    "equilibrium_metrics",
    "generate_scenario",
    "group_distance",
    "group_resource",
    "group_utility",
    "load_demo_scenario",
    "load_scenario",
    "load_trace",
    "log_group_utility",
    "potential_vector",
    "run_sweep",
    "run_to_convergence",
    "save_scenario",
    "save_trace",
    "scenario_digest",
    "trend_checks",
    "verify_ise",
    "__version__",
]
