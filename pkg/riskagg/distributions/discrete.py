"""
Discrete Parent Distributions
=============================

Sampling from a finite scenario set, used to run aggregation sampling against
a distribution whose exact risk region is known by enumeration.
"""

from dataclasses import dataclass

import numpy as np

from ..scenario_set import ScenarioSet


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """Draws scenario points with their probabilities"""
    scenarios: ScenarioSet

    @property
    def dim(self) -> int:
        return self.scenarios.dim

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.choice(self.scenarios.n, size=n, p=self.scenarios.probs)
        return self.scenarios.points[idx]
