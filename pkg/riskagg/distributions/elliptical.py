"""
Elliptical Distributions
========================

Y = P^T X + mu with X spherical (standard Normal or spherical Student-t),
so that Sigma = P^T P and x^T Y ~ ||P x|| X_1 + x^T mu.

Also: reproducible sample streams, survivor-function estimation with common
random numbers, and conditional means over aggregation regions.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from ..errors import DomainError, EmptyAggregationRegionError
from ..numerics import as_matrix, as_vector, assert_nonsingular, freeze, spd_factor
from ..scenario_set import ScenarioSet
from .special import std_normal_cdf, std_normal_quantile, student_t_quantile

logger = logging.getLogger(__name__)

DEFAULT_SURVIVOR_SAMPLES = 200_000
DEFAULT_SURVIVOR_SEED = 0x5EED_CAFE

# Gauss-Hermite nodes for the one-factor equicorrelation integral
_HERMITE_NODES = 96

# Upper bound on booleans materialized per comparison chunk
_CHUNK_CELLS = 4_000_000


class RadialFamily(Enum):
    """Spherical generator of an elliptical distribution"""
    NORMAL = "normal"
    STUDENT_T = "student_t"


@dataclass(frozen=True, eq=False)
class EllipticalDist:
    """
    Elliptical distribution (radial family, P, mu).

    Sampling uses the row convention y = x P + mu, i.e. the column form
    Y = P^T X + mu, which gives Cov = P^T P for the Normal family and
    x^T Y = (P x)^T X ~ ||P x|| X_1 + x^T mu.
    """
    P: np.ndarray
    mu: np.ndarray
    family: RadialFamily = RadialFamily.NORMAL
    dof: Optional[float] = None
    equicorrelation: Optional[float] = None

    def __post_init__(self):
        P = as_matrix(self.P, "P")
        mu = as_vector(self.mu, P.shape[0], "mu")
        assert_nonsingular(P)

        family = RadialFamily(self.family)
        if family is RadialFamily.STUDENT_T:
            if self.dof is None or not self.dof > 0:
                raise DomainError(f"Student-t family needs dof > 0, got {self.dof}")
        elif self.dof is not None:
            raise DomainError("dof only applies to the Student-t family")

        object.__setattr__(self, 'P', freeze(P))
        object.__setattr__(self, 'mu', freeze(mu))
        object.__setattr__(self, 'family', family)

    @classmethod
    def from_covariance(cls, mu, sigma, family: RadialFamily = RadialFamily.NORMAL,
                        dof: Optional[float] = None) -> "EllipticalDist":
        """Build with P the upper Cholesky factor, so P^T P = sigma"""
        sigma = as_matrix(sigma, "Sigma")
        return cls(spd_factor(sigma), mu, family, dof)

    @classmethod
    def standard_normal(cls, d: int) -> "EllipticalDist":
        if d < 1:
            raise DomainError(f"dimension must be >= 1, got {d}")
        return cls(np.eye(d), np.zeros(d))

    @classmethod
    def equicorrelated_normal(cls, d: int, rho: float, mu=None) -> "EllipticalDist":
        """N(mu, Lambda(rho)) with unit variances and off-diagonal rho"""
        if d < 1:
            raise DomainError(f"dimension must be >= 1, got {d}")
        if not -1.0 / max(d - 1, 1) < rho < 1.0:
            raise DomainError(f"rho={rho} does not give a positive definite Lambda(rho) for d={d}")
        sigma = np.full((d, d), float(rho))
        np.fill_diagonal(sigma, 1.0)
        mu = np.zeros(d) if mu is None else mu
        return cls(spd_factor(sigma), mu, equicorrelation=float(rho))

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    @property
    def sigma(self) -> np.ndarray:
        return self.P.T @ self.P

    @property
    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self.P - np.diag(np.diag(self.P))) == 0)

    def marginal_quantile(self, beta: float) -> float:
        """F_{X_1}^{-1}(beta) of the spherical generator"""
        if self.family is RadialFamily.STUDENT_T:
            return student_t_quantile(beta, self.dof)
        return std_normal_quantile(beta)

    def draw_spherical(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        if self.family is RadialFamily.STUDENT_T:
            w = rng.chisquare(self.dof, size=(n, 1))
            z = z / np.sqrt(w / self.dof)
        return z

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.draw_spherical(rng, n) @ self.P + self.mu


def derive_seed(master_seed: int, *keys: int) -> int:
    """Independent 64-bit seed for (master_seed, keys...)"""
    seq = np.random.SeedSequence([int(master_seed), *[int(k) for k in keys]])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


class SampleStream:
    """
    Single-owner stream of i.i.d. draws from a distribution.

    The same (dist, seed) always yields the same sequence of draws.
    """

    def __init__(self, dist, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.dist = dist
        self.seed = seed
        self.counter = 0
        self._rng = np.random.default_rng(seed)

    @classmethod
    def derived(cls, dist, master_seed: int, *keys: int) -> "SampleStream":
        return cls(dist, derive_seed(master_seed, *keys))

    @property
    def dim(self) -> int:
        return self.dist.dim

    def sample(self, n: int) -> np.ndarray:
        """Next n draws as an (n, d) array"""
        if n < 1:
            raise DomainError(f"sample size must be >= 1, got {n}")
        draws = self.dist.draw(self._rng, int(n))
        self.counter += int(n)
        return draws


def sample(stream: SampleStream, n: int) -> np.ndarray:
    return stream.sample(n)


class SurvivorEstimator:
    """
    Orthant probabilities Prob{Y > y} (upper) and Prob{Y < y} (lower).

    Exact product of marginals for Normal with diagonal P, one-factor
    Gauss-Hermite quadrature for equicorrelated Normal with rho > 0, and
    otherwise a fixed common-random-number Monte Carlo sample of size m.
    """

    def __init__(self, dist: EllipticalDist, m: int = DEFAULT_SURVIVOR_SAMPLES,
                 seed: int = DEFAULT_SURVIVOR_SEED):
        if m < 1:
            raise DomainError(f"survivor sample count must be >= 1, got {m}")
        self.dist = dist
        self.m = int(m)
        self.seed = int(seed)
        self._crn = None

        normal = dist.family is RadialFamily.NORMAL
        if normal and dist.is_diagonal:
            self.method = "product"
            self._scale = np.abs(np.diag(dist.P))
        elif normal and dist.equicorrelation is not None and dist.equicorrelation > 0:
            self.method = "one_factor"
            nodes, weights = np.polynomial.hermite.hermgauss(_HERMITE_NODES)
            self._factor = np.sqrt(2.0) * nodes
            self._weights = weights / np.sqrt(np.pi)
        else:
            self.method = "monte_carlo"
            self._crn = dist.draw(np.random.default_rng(self.seed), self.m)
            logger.debug("survivor CRN sample drawn: m=%d seed=%d d=%d", self.m, self.seed, dist.dim)

    @property
    def exact(self) -> bool:
        return self.method != "monte_carlo"

    def standard_error(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.exact:
            return np.zeros_like(p)
        return np.sqrt(p * (1.0 - p) / self.m)

    def upper(self, y) -> np.ndarray:
        """Prob{Y > y} for each row of y"""
        return self._orthant(y, upper=True)

    def lower(self, y) -> np.ndarray:
        """Prob{Y < y} for each row of y"""
        return self._orthant(y, upper=False)

    def _orthant(self, y, upper: bool) -> np.ndarray:
        Y = np.atleast_2d(np.asarray(y, dtype=float))
        if Y.shape[1] != self.dist.dim:
            raise DomainError(f"points have dimension {Y.shape[1]}, distribution has {self.dist.dim}")
        z = Y - self.dist.mu
        if self.method == "product":
            z = z / self._scale
            return np.prod(std_normal_cdf(-z if upper else z), axis=1)
        if self.method == "one_factor":
            return self._one_factor(z, upper)
        return self._monte_carlo(Y, upper)

    def _one_factor(self, z: np.ndarray, upper: bool) -> np.ndarray:
        # Y_i - mu_i = sqrt(rho) Z_0 + sqrt(1 - rho) Z_i
        rho = self.dist.equicorrelation
        common = np.sqrt(rho) * self._factor[None, :, None]
        chunk = max(1, _CHUNK_CELLS // (self._factor.shape[0] * self.dist.dim))
        out = np.empty(z.shape[0])
        for start in range(0, z.shape[0], chunk):
            shifted = (z[start:start + chunk, None, :] - common) / np.sqrt(1.0 - rho)
            marg = std_normal_cdf(-shifted if upper else shifted)
            out[start:start + chunk] = np.prod(marg, axis=2) @ self._weights
        return out

    def _monte_carlo(self, Y: np.ndarray, upper: bool) -> np.ndarray:
        crn = self._crn
        chunk = max(1, _CHUNK_CELLS // (self.m * self.dist.dim))
        out = np.empty(Y.shape[0])
        for start in range(0, Y.shape[0], chunk):
            block = Y[start:start + chunk]
            if upper:
                hits = np.all(crn[None, :, :] > block[:, None, :], axis=2)
            else:
                hits = np.all(crn[None, :, :] < block[:, None, :], axis=2)
            out[start:start + chunk] = hits.mean(axis=1)
        return out


@lru_cache(maxsize=16)
def _cached_estimator(dist: EllipticalDist, m: int, seed: int) -> SurvivorEstimator:
    return SurvivorEstimator(dist, m, seed)


def survivor_estimate(dist: EllipticalDist, y, m: int = DEFAULT_SURVIVOR_SAMPLES,
                      seed: int = DEFAULT_SURVIVOR_SEED) -> float:
    """Prob{Y > y} element-wise for a single point y"""
    y = np.asarray(y, dtype=float).reshape(1, -1)
    return float(_cached_estimator(dist, int(m), int(seed)).upper(y)[0])


def cond_expect_outside(source: Union[ScenarioSet, np.ndarray, EllipticalDist], region,
                        m: int = DEFAULT_SURVIVOR_SAMPLES, seed: int = 0) -> np.ndarray:
    """
    E[Y | Y outside region] for a scenario set (probability-weighted), a
    sample (plain mean) or a distribution (mean of m seeded draws).
    """
    if isinstance(source, ScenarioSet):
        points, weights = source.points, source.probs
    else:
        if isinstance(source, EllipticalDist):
            points = source.draw(np.random.default_rng(seed), int(m))
        else:
            points = np.atleast_2d(np.asarray(source, dtype=float))
        weights = np.full(points.shape[0], 1.0 / points.shape[0])

    outside = ~region.contains_many(points)
    mass = weights[outside].sum()
    if not outside.any() or mass <= 0.0:
        raise EmptyAggregationRegionError(
            f"none of {points.shape[0]} points lies in the aggregation region")
    return weights[outside] @ points[outside] / mass
