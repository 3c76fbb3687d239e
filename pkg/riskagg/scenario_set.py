"""
Scenario Sets
=============

Finite discrete distributions: mass points in R^d with probabilities.

CSV format: header ``p,y1,...,yd``, one row per scenario, values written with
17 significant digits so a round trip is lossless.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from .errors import DomainError
from .numerics import PROB_SUM_TOL, freeze


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Scenario points (n x d) with probabilities (n)"""
    points: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        probs = np.array(self.probs, dtype=float).reshape(-1)

        if points.ndim != 2 or points.shape[0] == 0:
            raise DomainError(f"points must be a non-empty n x d matrix, got shape {points.shape}")
        if probs.shape[0] != points.shape[0]:
            raise DomainError(f"{points.shape[0]} points but {probs.shape[0]} probabilities")
        if not np.all(np.isfinite(points)):
            raise DomainError("scenario points contain NaN or Inf")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise DomainError("probabilities must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"probabilities sum to {probs.sum():.17g}, expected 1")

        object.__setattr__(self, 'points', freeze(points))
        object.__setattr__(self, 'probs', freeze(probs))

    @classmethod
    def equiprobable(cls, points) -> "ScenarioSet":
        points = np.array(points, dtype=float)
        if points.ndim == 1:
            # a flat list is n one-dimensional scenarios
            points = points.reshape(-1, 1)
        n = points.shape[0]
        return cls(points, np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def mean(self) -> np.ndarray:
        return self.probs @ self.points

    def is_equiprobable(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.probs - 1.0 / self.n) <= tol))

    def to_frame(self) -> pd.DataFrame:
        columns = {'p': self.probs}
        for j in range(self.dim):
            columns[f'y{j + 1}'] = self.points[:, j]
        return pd.DataFrame(columns)

    def to_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, float_format='%.17g', lineterminator='\n')

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "ScenarioSet":
        frame = pd.read_csv(path, float_precision='round_trip')
        if list(frame.columns[:1]) != ['p'] or frame.shape[1] < 2:
            raise DomainError(f"{path}: expected header p,y1,...,yd")
        expected = [f'y{j}' for j in range(1, frame.shape[1])]
        if list(frame.columns[1:]) != expected:
            raise DomainError(f"{path}: expected columns {expected}, got {list(frame.columns[1:])}")
        return cls(frame[expected].to_numpy(dtype=float), frame['p'].to_numpy(dtype=float))
