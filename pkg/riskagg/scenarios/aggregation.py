"""
Aggregation Sampling and Reduction
==================================

Scenario generation that keeps risk-region draws as scenarios and collapses
everything in the aggregation region into a single conditional-mean point.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..distributions import SampleStream
from ..errors import DomainError, DrawCapExceededError
from ..scenario_set import ScenarioSet

logger = logging.getLogger(__name__)

DEFAULT_DRAW_CAP = 10 ** 9

# Draws per membership batch are bounded to keep region evaluation vectorized
# without wasting many draws once the target is reached
_MIN_BLOCK = 16
_MAX_BLOCK = 65_536


class NonRiskRepresentation(ABC):
    """
    Summary of the aggregation-region draws of one sampling run.

    The default keeps their running mean as a single scenario. Alternative
    summaries (several representative points, for instance cluster centers)
    plug into aggregation_sampling by implementing this interface; the
    returned weights must add up to the number of draws added.
    """

    @abstractmethod
    def add(self, y: np.ndarray) -> None:
        """Fold one aggregation-region draw into the summary"""
        pass

    @property
    @abstractmethod
    def count(self) -> int:
        """Draws added so far"""
        pass

    @abstractmethod
    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        """(k, d) representative points and their draw counts"""
        pass


class RunningMean(NonRiskRepresentation):
    """Single conditional-mean point, updated as y <- (k y + y_new) / (k + 1)"""

    def __init__(self, dim: int):
        self.mean = np.zeros(dim)
        self._count = 0

    def add(self, y: np.ndarray) -> None:
        self.mean = (self._count * self.mean + y) / (self._count + 1)
        self._count += 1

    @property
    def count(self) -> int:
        return self._count

    def points(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.mean.reshape(1, -1), np.array([float(self._count)])


@dataclass(frozen=True)
class AggSamplingReport:
    """
    Outcome of one aggregation sampling run.

    Draws come from the stream in blocks, and the unused tail of the last
    block is discarded. ``draws_consumed`` counts everything taken from the
    stream, so it can exceed ``effective_sample_size``; the else-branch extra
    draw follows the discarded tail.
    """
    scenario_set: ScenarioSet
    effective_sample_size: int    # draws that entered the scenario set
    n_risk: int                   # risk-region scenarios kept
    n_agg: int                    # draws folded into the trailing scenarios
    seed: int
    extra_draw: bool = False      # aggregation region was never hit
    draws_consumed: int = 0

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            'n_risk': self.n_risk,
            'n_agg': self.n_agg,
            'effective_sample_size': self.effective_sample_size,
            'seed': self.seed,
        }


def _block_size(remaining: int, n_risk: int, n_seen: int) -> int:
    risk_rate = (n_risk + 1) / (n_seen + 2)
    return int(np.clip(np.ceil(remaining / risk_rate), _MIN_BLOCK, _MAX_BLOCK))


def aggregation_sampling(stream: SampleStream, region, n_risk_target: int,
                         draw_cap: int = DEFAULT_DRAW_CAP,
                         representation: Optional[NonRiskRepresentation] = None) -> AggSamplingReport:
    """
    Draw until ``n_risk_target`` draws lie in ``region``.

    Draws outside the region are folded into ``representation``, by default
    their running mean. Each risk scenario gets probability 1/(n_agg + n) and
    each representative point its share of the n_agg aggregated draws. If no
    draw was aggregated, one extra draw is taken and appended with
    probability 1/(n + 1).

    ``stream`` is any sequential sampler with ``sample(n)``, ``dim`` and
    ``seed``; draws must stay sequential, so stratified designs do not fit.
    """
    if n_risk_target < 1:
        raise DomainError(f"n_risk_target must be >= 1, got {n_risk_target}")
    summary = representation if representation is not None else RunningMean(stream.dim)
    if summary.count:
        raise DomainError("representation must start empty")

    risk_points = []
    n_risk = 0
    draws = 0
    consumed = 0

    while n_risk < n_risk_target:
        if draws >= draw_cap:
            raise DrawCapExceededError(draws, n_risk, n_risk_target)
        size = min(_block_size(n_risk_target - n_risk, n_risk, draws), draw_cap - draws)
        block = stream.sample(size)
        consumed += size
        inside = region.contains_many(block)

        # only the prefix up to the draw completing the target is used
        hits = np.cumsum(inside)
        stop = int(np.searchsorted(hits, n_risk_target - n_risk)) + 1
        used, used_inside = block[:stop], inside[:stop]

        risk_points.append(used[used_inside])
        for y in used[~used_inside]:
            summary.add(y)
        n_risk += int(used_inside.sum())
        draws += used.shape[0]

    risk = np.concatenate(risk_points, axis=0)
    extra_draw = summary.count == 0
    if extra_draw:
        summary.add(stream.sample(1)[0])
        consumed += 1

    n_agg = summary.count
    agg_points, agg_counts = summary.points()
    total = n_agg + n_risk
    points = np.vstack([risk, agg_points])
    probs = np.concatenate([np.full(n_risk, 1.0 / total), np.asarray(agg_counts, dtype=float) / total])

    logger.debug("aggregation sampling: n_risk=%d n_agg=%d consumed=%d seed=%d",
                 n_risk, n_agg, consumed, stream.seed)
    return AggSamplingReport(ScenarioSet(points, probs), total, n_risk, n_agg, stream.seed, extra_draw, consumed)


def aggregate_discrete(scens: ScenarioSet, mask) -> ScenarioSet:
    """
    psi_R: keep in-mask scenarios, replace the rest by their conditional mean.

    The aggregated point carries the total out-of-mask probability and is
    appended last. An all-true mask returns the input unchanged.
    """
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if mask.shape[0] != scens.n:
        raise DomainError(f"mask has length {mask.shape[0]}, scenario set has {scens.n} points")
    if mask.all():
        return scens

    outside = ~mask
    mass = scens.probs[outside].sum()
    if mass <= 0.0:
        return ScenarioSet(scens.points[mask], scens.probs[mask])

    mean = scens.probs[outside] @ scens.points[outside] / mass
    return ScenarioSet(np.vstack([scens.points[mask], mean]), np.append(scens.probs[mask], mass))


def aggregation_reduction(sample: ScenarioSet, region) -> ScenarioSet:
    """Collapse the aggregation-region points of an equiprobable sample"""
    if not sample.is_equiprobable():
        raise DomainError("aggregation reduction needs an equiprobable sample")
    return aggregate_discrete(sample, region.contains_many(sample.points))


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 <= q < 1.0:
        raise DomainError(f"aggregation region probability must lie in [0, 1), got {q}")
    return q


def effective_size_stats(n: int, q: float) -> Tuple[float, float]:
    """
    Expected draws to collect n risk scenarios, n + n q / (1 - q), and the
    expected number of aggregated points when reducing a sample of n, n q.
    """
    q = _check_q(q)
    return n + n * q / (1.0 - q), n * q


def effective_size_variance(n: int, q: float) -> float:
    """Var N(n) for N(n) - n ~ NegativeBinomial(n, q)"""
    q = _check_q(q)
    return n * q / (1.0 - q) ** 2
