"""The k-dimensional normal-means family: unit-variance Gaussians N(mu, I_k).

Log-density, score, Fisher information, and KL divergence all have closed
forms here, so everything in this module is exact; Monte Carlo enters only
in the test suite, as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a 1-D vector with at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


@dataclass(frozen=True)
class ModelPoint:
    """A member of the family, identified by its mean vector."""

    mu: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.mu, "mu").copy()
        arr.flags.writeable = False
        object.__setattr__(self, "mu", arr)

    @property
    def k(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class SubfamilyPoint:
    """A point of the equal-means subfamily, mu = theta * (1, ..., 1)."""

    theta: float
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        object.__setattr__(self, "k", int(self.k))
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", float(self.theta))

    def embed(self) -> ModelPoint:
        return ModelPoint(np.full(self.k, self.theta))


def embed(theta: float, k: int) -> ModelPoint:
    """The full-family point with all k mean components equal to theta."""
    return SubfamilyPoint(theta, k).embed()


def _check_dim(point: ModelPoint, y) -> np.ndarray:
    y = _as_vector(y, "y")
    if y.shape[0] != point.k:
        raise ValueError(
            f"dimension mismatch: y has length {y.shape[0]}, expected {point.k}"
        )
    return y


def log_density(point: ModelPoint, y) -> float:
    """log N(y; mu, I) = -||y - mu||^2 / 2 - (k/2) log(2*pi)."""
    y = _check_dim(point, y)
    diff = y - point.mu
    return float(-0.5 * (diff @ diff) - 0.5 * point.k * LOG_2PI)


def score(point: ModelPoint, y) -> np.ndarray:
    """Gradient of the log-density in mu, which is y - mu.

    Has expectation zero under ``point`` and identity covariance.
    """
    y = _check_dim(point, y)
    return y - point.mu


def fisher_information(k: int) -> np.ndarray:
    """Fisher information of the mean parameter: the k x k identity."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return np.eye(int(k))


def kl(p1: ModelPoint, p2: ModelPoint) -> float:
    """KL divergence between family members: ||mu1 - mu2||^2 / 2.

    Within this family the divergence is symmetric (not true in general)
    and zero exactly when the two points coincide.
    """
    if p1.k != p2.k:
        raise ValueError(f"dimension mismatch: {p1.k} vs {p2.k}")
    diff = p1.mu - p2.mu
    return float(0.5 * (diff @ diff))
