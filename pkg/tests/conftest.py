import pytest

from groupform.model import Agent, Scenario
from groupform.persistence import load_demo_scenario


@pytest.fixture(scope="session")
def demo_scenario() -> Scenario:
    return load_demo_scenario()


def make_scenario(rows, k=3) -> Scenario:
    """Compact scenario builder: rows of (category, resource, x, y)."""
    agents = [
        Agent(id=i, category=c, resource=float(r), x=float(x), y=float(y))
        for i, (c, r, x, y) in enumerate(rows)
    ]
    return Scenario(agents, k=k)
