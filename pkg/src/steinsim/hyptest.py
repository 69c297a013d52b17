"""Hypothesis-testing pipeline for the point null mu = mu0 * 1.

Test statistics are squared distances between the point estimate and the
null mean (for the ML estimate this is the log likelihood ratio statistic
up to a monotone map).  Critical values and tail probabilities come from
an empirical null distribution simulated at mu0, so every downstream
quantity is invariant under strictly increasing transformations of the
statistics.

Semi-tail units standardize a statistic ``t`` as ``s = -log2
P0(T >= t)``: one extra unit means the null tail area halved.

Streams: null calibration, power evaluation, and figure pairs draw from
the disjoint streams 1, 2 and 3 of the configured seed, so rejection
fractions are never computed on the draws that set the critical values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import chi2, ncx2

from . import mc
from .estimators import EstimatorKind, estimate_batch

DEFAULT_MU0 = 1.25
DEFAULT_ALPHAS = (0.01, 0.05)

NULL_STREAM = 1
ALT_STREAM = 2
PAIR_STREAM = 3


class NullResolutionError(ValueError):
    """Too few null samples to resolve the requested significance level."""


@dataclass(frozen=True)
class NullCalibration:
    """Empirical null distribution of a test statistic.

    ``critical_values[alpha]`` is the empirical (1 - alpha) quantile of
    ``sorted_null`` under the order-statistic rule
    ``sorted[ceil((1 - alpha) * (n + 1)) - 1]``.
    """

    kind: EstimatorKind
    mu0: float
    sorted_null: np.ndarray
    critical_values: dict[float, float]
    n_null: int
    seed: int

    def __post_init__(self):
        values = np.asarray(self.sorted_null, dtype=np.float64)
        if values.ndim != 1 or values.size != self.n_null:
            raise ValueError("sorted_null must be 1-D with n_null entries")
        if np.any(np.diff(values) < 0):
            raise ValueError("sorted_null must be ascending")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "sorted_null", values)


def test_statistic(kind: EstimatorKind, y, mu0: float) -> float:
    """Squared distance between the point estimate and the null mean."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 1:
        raise ValueError("y must be a 1-D vector")
    if not np.isfinite(mu0):
        raise ValueError("mu0 must be finite")
    return float(statistics_batch(kind, y[None, :], mu0)[0])


test_statistic.__test__ = False  # API name, not a pytest case


def statistics_batch(kind: EstimatorKind, y: np.ndarray, mu0: float,
                     index_offset: int = 0) -> np.ndarray:
    """Row-wise test statistics for an (n, k) observation array."""
    est = estimate_batch(kind, y, index_offset=index_offset)
    diff = est - mu0
    return np.einsum("ij,ij->i", diff, diff)


def null_statistics(kind: EstimatorKind, config: mc.SimulationConfig) -> np.ndarray:
    """Unsorted null-statistic values drawn on the calibration stream."""
    return mc.map_samples(
        config,
        lambda y, start: statistics_batch(kind, y, config.theta, index_offset=start),
        stream=NULL_STREAM,
    )


def alternative_statistics(kind: EstimatorKind, theta_alt: float,
                           config: mc.SimulationConfig,
                           mu0: float = DEFAULT_MU0) -> np.ndarray:
    """Statistic values under the alternative, on the evaluation stream."""
    cfg = config.with_theta(theta_alt)
    return mc.map_samples(
        cfg,
        lambda y, start: statistics_batch(kind, y, mu0, index_offset=start),
        stream=ALT_STREAM,
    )


def _critical_value(sorted_values: np.ndarray, alpha: float) -> float:
    n = sorted_values.size
    idx = int(np.ceil((1.0 - alpha) * (n + 1))) - 1
    return float(sorted_values[min(max(idx, 0), n - 1)])


def calibration_from_statistics(kind: EstimatorKind, values: np.ndarray,
                                alphas: Iterable[float], mu0: float,
                                seed: int) -> NullCalibration:
    """Build a calibration from raw (unsorted) null-statistic values."""
    alphas = [float(a) for a in alphas]
    if not alphas or any(not 0 < a < 1 for a in alphas):
        raise ValueError("significance levels must lie strictly in (0, 1)")
    values = np.sort(np.asarray(values, dtype=np.float64))
    if values.size < 100 / min(alphas):
        raise NullResolutionError(
            f"insufficient null resolution: {values.size} samples cannot "
            f"calibrate alpha={min(alphas):g} (need at least "
            f"{int(np.ceil(100 / min(alphas)))})"
        )
    critical = {a: _critical_value(values, a) for a in alphas}
    return NullCalibration(kind, float(mu0), values, critical, values.size, seed)


def calibrate_null(kind: EstimatorKind, config: mc.SimulationConfig,
                   alphas: Iterable[float] = DEFAULT_ALPHAS) -> NullCalibration:
    """Simulate the null distribution at config.theta and fix critical values."""
    return calibration_from_statistics(
        kind, null_statistics(kind, config), alphas, config.theta, config.seed
    )


def power(kind: EstimatorKind, theta_alt: float, calibration: NullCalibration,
          config: mc.SimulationConfig) -> dict[float, float]:
    """Fraction of alternative draws strictly exceeding each critical value.

    The alternative draws share one stream across estimators and thetas
    (common random numbers); they are disjoint from the calibration draws.
    """
    if calibration.kind is not kind:
        raise ValueError(
            f"calibration is for {calibration.kind}, not {kind}"
        )
    stats = alternative_statistics(kind, theta_alt, config, calibration.mu0)
    return {
        alpha: float((stats > crit).mean())
        for alpha, crit in calibration.critical_values.items()
    }


def semitail(t, calibration: NullCalibration):
    """Semi-tail value s = -log2(p) with p = (#{null >= t} + 1) / (n + 1).

    The add-one rule keeps p positive, so statistics beyond the largest
    null draw still get a finite value.  Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=np.float64)
    n = calibration.n_null
    count_ge = n - np.searchsorted(calibration.sorted_null, t, side="left")
    s = -np.log2((count_ge + 1.0) / (n + 1.0))
    return float(s) if s.ndim == 0 else s


@dataclass(frozen=True)
class SemiTailPair:
    """Both estimators' semi-tail coordinates for one shared sample."""

    sample_index: int
    s_js: float
    s_ml: float
    shrinkage: float


def paired_semitail(theta_alt: float, n_points: int,
                    calib_js: NullCalibration, calib_ml: NullCalibration,
                    config: mc.SimulationConfig) -> list[SemiTailPair]:
    """Per-sample (s_js, s_ml) pairs at the alternative theta.

    Both statistics are computed on the same draws; each is standardized
    against its own null calibration.
    """
    if calib_js.kind is not EstimatorKind.JS or calib_ml.kind is not EstimatorKind.ML:
        raise ValueError("calibrations must be (JS, ML) in that order")
    if calib_js.mu0 != calib_ml.mu0:
        raise ValueError("calibrations target different null means")
    if n_points < 1:
        raise ValueError("n_points must be positive")
    mu0 = calib_js.mu0
    k = config.k
    cfg = mc.SimulationConfig(k=k, theta=theta_alt, n_samples=n_points,
                              seed=config.seed, n_workers=config.n_workers)
    y = mc.map_samples(cfg, lambda block, start: block, stream=PAIR_STREAM)
    t_js = statistics_batch(EstimatorKind.JS, y, mu0)
    t_ml = statistics_batch(EstimatorKind.ML, y, mu0)
    s_js = semitail(t_js, calib_js)
    s_ml = semitail(t_ml, calib_ml)
    norm_sq = np.einsum("ij,ij->i", y, y)
    shrink = 1.0 - (k - 2.0) / norm_sq
    return [
        SemiTailPair(i, float(s_js[i]), float(s_ml[i]), float(shrink[i]))
        for i in range(n_points)
    ]


def ml_power_oracle(theta_alt: float, alpha: float, k: int,
                    mu0: float = DEFAULT_MU0) -> float:
    """Exact power of the ML test from the noncentral chi-square law.

    The ML statistic at theta is chi-square with k degrees of freedom and
    noncentrality k * (theta - mu0)^2; its exceedance of the central
    (1 - alpha) quantile is the power.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly in (0, 1)")
    ncp = k * (theta_alt - mu0) ** 2
    if ncp == 0:
        return float(alpha)
    crit = chi2.ppf(1.0 - alpha, k)
    return float(ncx2.sf(crit, k, ncp))
