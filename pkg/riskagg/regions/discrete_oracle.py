"""
Exact risk regions of finite scenario sets.

For a grid of decisions standing in for the feasible set, a scenario is a
risk scenario iff its loss reaches the discrete beta-quantile for at least
one decision.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from ..errors import DomainError
from ..numerics import check_probability
from ..scenario_set import ScenarioSet
from ..scenarios import aggregate_discrete
from ..tail_risk.measures import CVaRNormalization, LossSample, cvar_discrete, var_discrete
from .region_interface import RegionKind, RiskRegion

logger = logging.getLogger(__name__)

LossFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

TAIL_MATCH_TOL = 1e-10


def portfolio_loss(x, points) -> np.ndarray:
    """Loss -x^T y for every scenario row y"""
    return -(np.atleast_2d(points) @ np.asarray(x, dtype=float))


def linear_loss(x, points) -> np.ndarray:
    """Loss x^T y for every scenario row y"""
    return np.atleast_2d(points) @ np.asarray(x, dtype=float)


def discrete_risk_region_oracle(scens: ScenarioSet, loss: LossFunction,
                                X_grid: Sequence, beta: float) -> np.ndarray:
    """Boolean mask: scenario loss >= VaR_beta for some decision in X_grid"""
    beta = check_probability(beta)
    if len(X_grid) == 0:
        raise DomainError("X_grid must contain at least one decision")

    mask = np.zeros(scens.n, dtype=bool)
    for x in X_grid:
        losses = loss(np.asarray(x, dtype=float), scens.points)
        var = var_discrete(LossSample(losses, scens.probs), beta)
        mask |= losses >= var
    return mask


@dataclass
class TailCheckResult:
    """Outcome of comparing tail measures before and after aggregation"""
    holds: bool
    violating_decision: Optional[np.ndarray] = None
    details: List[Dict[str, Any]] = field(default_factory=list)

    def __bool__(self):
        return self.holds


def _tail_measures(losses: np.ndarray, probs: np.ndarray, beta: float) -> Dict[str, float]:
    sample = LossSample(losses, probs)
    return {
        'var': var_discrete(sample, beta),
        'cvar': cvar_discrete(sample, beta, CVaRNormalization.UNNORMALIZED),
        'cvar_standard': cvar_discrete(sample, beta, CVaRNormalization.STANDARD),
    }


def check_aggregation_preserves_tail(scens: ScenarioSet, loss: LossFunction, X_grid: Sequence,
                                     beta: float, region_mask) -> TailCheckResult:
    """
    Aggregate outside ``region_mask`` and compare VaR and both CVaR
    normalizations for every grid decision.
    """
    beta = check_probability(beta)
    aggregated = aggregate_discrete(scens, region_mask)

    details = []
    for x in X_grid:
        x = np.asarray(x, dtype=float)
        before = _tail_measures(loss(x, scens.points), scens.probs, beta)
        after = _tail_measures(loss(x, aggregated.points), aggregated.probs, beta)
        record = {'x': x.tolist(), 'before': before, 'after': after}
        details.append(record)

        if any(abs(before[k] - after[k]) > TAIL_MATCH_TOL for k in before):
            logger.debug("tail measures changed by aggregation at x=%s: %s -> %s", x, before, after)
            return TailCheckResult(False, x, details)

    return TailCheckResult(True, None, details)


class ScenarioMaskRegion(RiskRegion):
    """
    Risk region given by a membership mask over the points of a scenario set.

    Only the scenario points themselves can be tested; membership of any
    other point is a DomainError.
    """

    kind = RegionKind.SCENARIO_MASK

    def __init__(self, scens: ScenarioSet, mask, beta: float):
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if mask.shape[0] != scens.n:
            raise DomainError(f"mask has length {mask.shape[0]}, scenario set has {scens.n} points")
        self.scens = scens
        self.mask = mask
        self.beta = check_probability(beta)
        self.dim = scens.dim
        self._lookup = {row.tobytes(): bool(m) for row, m in zip(scens.points, mask)}

    @classmethod
    def from_oracle(cls, scens: ScenarioSet, loss: LossFunction, X_grid: Sequence,
                    beta: float) -> "ScenarioMaskRegion":
        return cls(scens, discrete_risk_region_oracle(scens, loss, X_grid, beta), beta)

    def contains_many(self, Y) -> np.ndarray:
        Y = np.ascontiguousarray(self._as_points(Y))
        try:
            return np.array([self._lookup[row.tobytes()] for row in Y], dtype=bool)
        except KeyError:
            raise DomainError("point is not one of the region's scenarios") from None

    def describe(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'dim': self.dim,
            'beta': self.beta,
            'n_scenarios': self.scens.n,
            'n_risk_scenarios': int(self.mask.sum()),
        }
