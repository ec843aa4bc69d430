"""Input validation helpers bridging array-land and the agent table.

The estimator API accepts a plain (n, 4) array with columns
(category, resource, x, y); these helpers validate it and convert to and
from the package's Scenario type.
"""

from __future__ import annotations

import numpy as np

from .model import Agent, Scenario

COLUMNS = ("category", "resource", "x", "y")


def check_agent_array(X, k: int) -> np.ndarray:
    """Validate an (n, 4) agent array and return it as float64.

    Categories must be integral values in [0, k); resources strictly
    positive; everything finite.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2D array, got {X.ndim}D")
    if X.shape[1] != len(COLUMNS):
        raise ValueError(
            f"expected {len(COLUMNS)} columns {COLUMNS}, got {X.shape[1]}"
        )
    if X.shape[0] < 1:
        raise ValueError("need at least one agent row")
    if not np.isfinite(X).all():
        raise ValueError("agent array contains non-finite values")
    cats = X[:, 0]
    if not np.array_equal(cats, np.floor(cats)):
        raise ValueError("category column must hold integral values")
    if cats.min() < 0 or cats.max() >= k:
        raise ValueError(f"categories must lie in [0, {k})")
    if (X[:, 1] <= 0).any():
        raise ValueError("resources must be strictly positive")
    return X


def scenario_from_array(X, k: int) -> Scenario:
    X = check_agent_array(X, k)
    agents = [
        Agent(id=i, category=int(row[0]), resource=float(row[1]),
              x=float(row[2]), y=float(row[3]))
        for i, row in enumerate(X)
    ]
    return Scenario(agents, k=k)


def scenario_to_array(scenario: Scenario) -> np.ndarray:
    return np.array(
        [[a.category, a.resource, a.x, a.y] for a in scenario.agents],
        dtype=np.float64,
    )
