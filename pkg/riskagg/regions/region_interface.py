"""
Risk Region Interface
=====================

Abstract interface for membership-testable risk regions. The complement of a
risk region is the aggregation (non-risk) region.
"""

from abc import ABC, abstractmethod
from enum import Enum
from typing import Any, Dict

import numpy as np

from ..errors import DomainError


class RegionKind(Enum):
    """Risk region families"""
    MONOTONIC = "monotonic"            # Conservative region for monotonic losses
    ELLIPSOID = "ellipsoid"            # Elliptical, unrestricted decisions
    CONE_ELLIPTICAL = "cone"           # Elliptical, decisions in a cone
    SCENARIO_MASK = "scenario_mask"    # Exact region of a finite scenario set
    WHOLE_SPACE = "whole_space"        # Everything is risk (q = 0)


class Orientation(Enum):
    """Direction in which the loss moves with the random outcome"""
    INCREASING = "increasing"    # e.g. f(x, y) = x^T y
    DECREASING = "decreasing"    # e.g. portfolio loss f(x, y) = -x^T y


class RiskRegion(ABC):
    """Abstract risk region in R^d"""

    kind: RegionKind
    beta: float
    dim: int

    @abstractmethod
    def contains_many(self, Y) -> np.ndarray:
        """
        Membership of each row of an (n, d) array.

        Returns:
            Boolean array, True where the point lies in the risk region
        """
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """JSON-friendly summary of the region configuration"""
        pass

    def contains(self, y) -> bool:
        return bool(self.contains_many(np.reshape(np.asarray(y, dtype=float), (1, -1)))[0])

    def _as_points(self, Y) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.dim:
            raise DomainError(f"points have dimension {Y.shape[1]}, region has {self.dim}")
        return Y


class WholeSpaceRegion(RiskRegion):
    """Every point is a risk point; the aggregation region is empty"""

    kind = RegionKind.WHOLE_SPACE

    def __init__(self, dim: int, beta: float = 0.0):
        if dim < 1:
            raise DomainError(f"dimension must be >= 1, got {dim}")
        self.dim = int(dim)
        self.beta = float(beta)

    def contains_many(self, Y) -> np.ndarray:
        return np.ones(self._as_points(Y).shape[0], dtype=bool)

    def describe(self) -> Dict[str, Any]:
        return {'kind': self.kind.value, 'dim': self.dim}


def require_kind(region: RiskRegion, kind: RegionKind) -> None:
    if region.kind is not kind:
        raise DomainError(f"expected a {kind.value} region, got {region.kind.value}")
