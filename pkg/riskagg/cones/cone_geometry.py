"""
Cone Geometry
=============

Closed convex cones (full space, nonnegative orthant, finitely generated) and
Euclidean projection onto them.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import nnls

from ..errors import DomainError, ProjectionError
from ..numerics import as_matrix, assert_nonsingular, freeze

logger = logging.getLogger(__name__)

# Generators with cosine similarity above this are treated as duplicates
DUPLICATE_COSINE = 1.0 - 1e-10

# Generators shorter than this are dropped as zero
ZERO_GENERATOR = 1e-15


class ConeKind(Enum):
    FULL_SPACE = "full_space"
    NONNEG_ORTHANT = "nonneg_orthant"
    GENERATED = "generated"


@dataclass(frozen=True, eq=False)
class ConeSpec:
    """
    Convex cone description.

    GENERATED cones store unit-length, deduplicated generators as rows of
    ``generators``. A generated cone whose generators are exactly the
    coordinate axes is flagged ``is_orthant`` and projected by clamping.
    """
    kind: ConeKind
    dim: int
    generators: Optional[np.ndarray] = None
    is_orthant: bool = False

    @classmethod
    def full_space(cls, d: int) -> "ConeSpec":
        return cls(ConeKind.FULL_SPACE, _check_dim(d))

    @classmethod
    def nonneg_orthant(cls, d: int) -> "ConeSpec":
        return cls(ConeKind.NONNEG_ORTHANT, _check_dim(d), is_orthant=True)

    @classmethod
    def generated(cls, generators) -> "ConeSpec":
        """cone{g_1, ..., g_k} for the rows g_i of ``generators``"""
        G = np.array(generators, dtype=float)
        if G.ndim == 1:
            G = G.reshape(1, -1)
        if G.ndim != 2 or G.shape[1] == 0 or not np.all(np.isfinite(G)):
            raise DomainError(f"generators must be a finite k x d matrix, got shape {G.shape}")

        norms = np.linalg.norm(G, axis=1)
        keep = norms > ZERO_GENERATOR
        if not keep.any():
            raise DomainError("a generated cone needs at least one nonzero generator")
        G = G[keep] / norms[keep, None]

        unique = []
        for g in G:
            if all(g @ u <= DUPLICATE_COSINE for u in unique):
                unique.append(g)
        G = np.array(unique)

        d = G.shape[1]
        axes = np.abs(G - np.eye(d)[np.argmax(G, axis=1)]).max(axis=1) == 0.0
        orthant = G.shape[0] == d and bool(axes.all()) and len(set(np.argmax(G, axis=1))) == d
        return cls(ConeKind.GENERATED, d, freeze(G), orthant)

    @property
    def n_generators(self) -> int:
        return 0 if self.generators is None else self.generators.shape[0]

    def __repr__(self):
        if self.kind is ConeKind.GENERATED:
            return f"ConeSpec(generated, d={self.dim}, k={self.n_generators})"
        return f"ConeSpec({self.kind.value}, d={self.dim})"


def _check_dim(d: int) -> int:
    d = int(d)
    if d < 1:
        raise DomainError(f"cone dimension must be >= 1, got {d}")
    return d


def project(cone: ConeSpec, y) -> np.ndarray:
    """
    Euclidean projection p_K(y) = argmin_{x in K} ||x - y||.

    Generated cones are solved as nonnegative least squares over the
    generators; the projection is the resulting nonnegative combination.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != cone.dim:
        raise DomainError(f"point has dimension {y.shape[0]}, cone has {cone.dim}")

    if cone.kind is ConeKind.FULL_SPACE:
        return y.copy()
    if cone.is_orthant:
        return np.maximum(y, 0.0)

    A = cone.generators.T
    maxiter = 10 * (cone.n_generators + cone.dim)
    try:
        coef, _ = nnls(A, y, maxiter=maxiter)
    except RuntimeError as e:
        fallback = np.maximum(np.linalg.lstsq(A, y, rcond=None)[0], 0.0)
        residual = float(np.linalg.norm(A @ fallback - y))
        raise ProjectionError(
            f"NNLS did not converge in {maxiter} iterations ({e})", residual) from e
    return A @ coef


def project_many(cone: ConeSpec, Y) -> np.ndarray:
    """Row-wise projection of an (n, d) array"""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != cone.dim:
        raise DomainError(f"points have dimension {Y.shape[1]}, cone has {cone.dim}")
    if cone.kind is ConeKind.FULL_SPACE:
        return Y.copy()
    if cone.is_orthant:
        return np.maximum(Y, 0.0)
    return np.array([project(cone, y) for y in Y])


def transform_cone(cone: ConeSpec, P) -> ConeSpec:
    """Image cone P K = {P x : x in K}"""
    P = as_matrix(P, "P")
    if P.shape[0] != cone.dim:
        raise DomainError(f"P is {P.shape[0]}x{P.shape[0]}, cone has dimension {cone.dim}")
    assert_nonsingular(P)

    if cone.kind is ConeKind.FULL_SPACE:
        return ConeSpec.full_space(cone.dim)
    if cone.kind is ConeKind.NONNEG_ORTHANT:
        return ConeSpec.generated(P.T)
    return ConeSpec.generated(cone.generators @ P.T)


def conic_hull_of_simplex(d: int) -> ConeSpec:
    """cone{x : sum(x) = 1, x >= 0}, the nonnegative orthant"""
    return ConeSpec.nonneg_orthant(d)
