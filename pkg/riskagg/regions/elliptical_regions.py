"""
Exact risk regions for linear losses of elliptical outcomes.

With Y = P^T X + mu and w = (P^T)^{-1} (y - mu), the loss x^T y is in its
beta-tail for some decision x in K iff ||p_{K'}(w)|| > alpha, where K' = P K
and alpha is the beta-quantile of X_1. For K the full space the non-risk set
is the ellipsoid (y - mu)^T Sigma^{-1} (y - mu) <= alpha^2.
"""

import logging
from math import comb
from typing import Any, Dict, Optional

import numpy as np

from ..cones import ConeSpec, project_many, transform_cone
from ..distributions import EllipticalDist, RadialFamily, chi2_cdf, std_normal_quantile, student_t_quantile
from ..errors import DomainError
from ..numerics import as_matrix, as_vector, assert_nonsingular, check_probability, spd_factor, whiten
from .region_interface import Orientation, RegionKind, RiskRegion, require_kind

logger = logging.getLogger(__name__)


def _radius(beta: float, family: RadialFamily, dof: Optional[float]) -> float:
    """beta-quantile of the first spherical coordinate X_1"""
    if family is RadialFamily.STUDENT_T:
        if dof is None or not dof > 0:
            raise DomainError(f"Student-t family needs dof > 0, got {dof}")
        return student_t_quantile(beta, dof)
    return std_normal_quantile(beta)


class EllipsoidRegion(RiskRegion):
    """Risk iff the Mahalanobis radius of y exceeds alpha"""

    kind = RegionKind.ELLIPSOID

    def __init__(self, mu, sigma, beta: float,
                 family: RadialFamily = RadialFamily.NORMAL, dof: Optional[float] = None,
                 factor=None):
        sigma = as_matrix(sigma, "Sigma")
        self.P = spd_factor(sigma) if factor is None else as_matrix(factor, "P")
        self.mu = as_vector(mu, sigma.shape[0], "mu")
        self.sigma = sigma
        self.dim = sigma.shape[0]
        self.beta = check_probability(beta)
        self.family = RadialFamily(family)
        self.alpha = _radius(self.beta, self.family, dof)

    @classmethod
    def from_dist(cls, dist: EllipticalDist, beta: float) -> "EllipsoidRegion":
        return cls(dist.mu, dist.sigma, beta, dist.family, dist.dof, factor=dist.P)

    def radius(self, Y) -> np.ndarray:
        return np.linalg.norm(whiten(self.P, self._as_points(Y) - self.mu), axis=1)

    def contains_many(self, Y) -> np.ndarray:
        return self.radius(Y) > self.alpha

    def describe(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'dim': self.dim,
            'beta': self.beta,
            'family': self.family.value,
            'alpha': self.alpha,
        }


class ConeEllipticalRegion(RiskRegion):
    """
    Risk iff ||p_{K'}(w)|| > alpha.

    INCREASING orientation uses w = (P^T)^{-1} (y - mu) (loss x^T y);
    DECREASING uses w = (P^T)^{-1} (mu - y) (portfolio loss -x^T y).
    """

    kind = RegionKind.CONE_ELLIPTICAL

    def __init__(self, P, mu, cone: ConeSpec, beta: float,
                 family: RadialFamily = RadialFamily.NORMAL, dof: Optional[float] = None,
                 orientation: Orientation = Orientation.INCREASING):
        P = as_matrix(P, "P")
        assert_nonsingular(P)
        if cone.dim != P.shape[0]:
            raise DomainError(f"cone dimension {cone.dim} does not match P ({P.shape[0]})")
        self.P = P
        self.mu = as_vector(mu, P.shape[0], "mu")
        self.dim = P.shape[0]
        self.cone = cone
        self.image_cone = transform_cone(cone, P)
        self.beta = check_probability(beta)
        self.family = RadialFamily(family)
        self.alpha = _radius(self.beta, self.family, dof)
        self.orientation = Orientation(orientation)
        logger.debug("cone region: d=%d beta=%g alpha=%.6g cone=%r orientation=%s",
                     self.dim, self.beta, self.alpha, self.image_cone, self.orientation.value)

    @classmethod
    def from_dist(cls, dist: EllipticalDist, cone: ConeSpec, beta: float,
                  orientation: Orientation = Orientation.INCREASING) -> "ConeEllipticalRegion":
        return cls(dist.P, dist.mu, cone, beta, dist.family, dist.dof, orientation)

    def projected_radius(self, Y) -> np.ndarray:
        Y = self._as_points(Y)
        delta = Y - self.mu if self.orientation is Orientation.INCREASING else self.mu - Y
        return np.linalg.norm(project_many(self.image_cone, whiten(self.P, delta)), axis=1)

    def contains_many(self, Y) -> np.ndarray:
        return self.projected_radius(Y) > self.alpha

    def describe(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'dim': self.dim,
            'beta': self.beta,
            'family': self.family.value,
            'alpha': self.alpha,
            'cone': self.cone.kind.value,
            'orientation': self.orientation.value,
        }


def contains_ellipsoid(region: RiskRegion, y) -> bool:
    require_kind(region, RegionKind.ELLIPSOID)
    return region.contains(y)


def contains_cone_elliptical(region: RiskRegion, y) -> bool:
    require_kind(region, RegionKind.CONE_ELLIPTICAL)
    return region.contains(y)


def orthant_nonrisk_probability(d: int, beta: float) -> float:
    """
    Prob{||Y_+|| <= Phi^{-1}(beta)} for Y ~ N(0, I_d).

    Conditional on k positive coordinates, ||Y_+||^2 is chi-squared with k
    degrees of freedom, so the probability is a binomial mixture.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    alpha = std_normal_quantile(beta)
    if alpha < 0.0:
        return 0.0
    total = 2.0 ** -d
    for k in range(1, d + 1):
        total += comb(d, k) * 2.0 ** -d * chi2_cdf(alpha * alpha, k)
    return float(total)
