"""
Conservative risk region for losses that are monotonic in the outcome.

Increasing losses: y is a risk point iff Prob{Y > y} <= 1 - beta.
Decreasing losses: y is a risk point iff Prob{Y < y} <= 1 - beta.
"""

import logging
from typing import Any, Dict

import numpy as np

from ..distributions import DEFAULT_SURVIVOR_SAMPLES, DEFAULT_SURVIVOR_SEED, EllipticalDist, SurvivorEstimator
from ..numerics import check_probability
from .region_interface import Orientation, RegionKind, RiskRegion, require_kind

logger = logging.getLogger(__name__)


class MonotonicRegion(RiskRegion):
    """
    Orthant-probability risk region.

    Membership is evaluated against one survivor estimator per instance, so
    it is a fixed predicate for the lifetime of the region.
    """

    kind = RegionKind.MONOTONIC

    def __init__(self, dist: EllipticalDist, beta: float,
                 orientation: Orientation = Orientation.INCREASING,
                 survivor_samples: int = DEFAULT_SURVIVOR_SAMPLES,
                 survivor_seed: int = DEFAULT_SURVIVOR_SEED):
        self.dist = dist
        self.beta = check_probability(beta)
        self.dim = dist.dim
        self.orientation = Orientation(orientation)
        self.estimator = SurvivorEstimator(dist, survivor_samples, survivor_seed)
        logger.debug("monotonic region: beta=%g orientation=%s survivor=%s",
                     self.beta, self.orientation.value, self.estimator.method)

    def orthant_probability(self, Y) -> np.ndarray:
        Y = self._as_points(Y)
        if self.orientation is Orientation.INCREASING:
            return self.estimator.upper(Y)
        return self.estimator.lower(Y)

    def contains_many(self, Y) -> np.ndarray:
        return self.orthant_probability(Y) <= 1.0 - self.beta

    def describe(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'dim': self.dim,
            'beta': self.beta,
            'orientation': self.orientation.value,
            'survivor_method': self.estimator.method,
            'survivor_samples': self.estimator.m,
        }


def contains_monotonic(region: RiskRegion, y) -> bool:
    require_kind(region, RegionKind.MONOTONIC)
    return region.contains(y)
