import json
from pathlib import Path

import pytest

from peacegame import Dist, Scenario

ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = ROOT / "scenarios"
GOLDEN = sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))


def kinked() -> Dist:
    """Quadratic CDF on [0, 30] joined to a linear one on [30, 100]."""
    return Dist.piecewise([(0, 30, [0, 0, 1 / 3000]), (30, 100, [0, 0.01])])


def load(name: str) -> Scenario:
    raw = json.loads((SCENARIO_DIR / f"{name}.json").read_text())
    return Scenario.from_literals(raw["f1"], raw["f2"])


@pytest.fixture
def u100():
    return Dist.uniform(0, 100)


@pytest.fixture
def kinked_dist():
    return kinked()


@pytest.fixture
def example():
    return Scenario(Dist.uniform(30, 130), Dist.uniform(0, 100))
