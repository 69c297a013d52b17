"""Shared fixtures: full-scale (N = 10^6) runs are expensive, so null
calibrations, assessment reports, and power evaluations at the default
seed are computed once per session."""

import pytest

from steinsim import SimulationConfig, calibrate_null, power
from steinsim.assess import assess
from steinsim.estimators import EstimatorKind
from steinsim.mc import DEFAULT_SEED

K = 14
FULL_N = 1_000_000
MU0 = 1.25
ASSESS_THETAS = (0.0, 0.5, 1.25, 2.0, 2.5)
POWER_THETAS = (0.0, 0.5, 1.0, 1.25, 1.5, 2.0, 2.5)
ALPHAS = (0.01, 0.05)


@pytest.fixture(scope="session")
def full_config():
    return SimulationConfig(k=K, theta=0.0, n_samples=FULL_N,
                            seed=DEFAULT_SEED, n_workers=2)


@pytest.fixture(scope="session")
def full_calibrations(full_config):
    null_cfg = full_config.with_theta(MU0)
    return {
        kind: calibrate_null(kind, null_cfg, ALPHAS)
        for kind in (EstimatorKind.JS, EstimatorKind.ML)
    }


@pytest.fixture(scope="session")
def full_reports(full_config):
    return {
        (kind, theta): assess(kind, theta, full_config)
        for kind in (EstimatorKind.JS, EstimatorKind.ML)
        for theta in ASSESS_THETAS
    }


@pytest.fixture(scope="session")
def full_powers(full_config, full_calibrations):
    return {
        (kind, theta): power(kind, theta, full_calibrations[kind], full_config)
        for kind in (EstimatorKind.JS, EstimatorKind.ML)
        for theta in POWER_THETAS
    }
