"""Threshold estimation and volatility-asymmetry testing for oscillating
geometric Brownian motion."""

from gobm.errors import (
    DegenerateSeriesError,
    GobmError,
    InvalidCandidateError,
    InvalidParameterError,
    NoValidThresholdError,
    TestUnavailableError,
)
from gobm.estimators import FitReport, fit_at_threshold
from gobm.model import GobmParams, LogSeries, Regime, classify_regime, obm_density, zero_drift_density
from gobm.simulate import SimulationSpec, simulate_logpath, simulate_paths
from gobm.threshold import ThresholdScan, select_threshold
from gobm.voltest import EllipseTest, test_equal_volatility

__version__ = "0.1.0"

__all__ = [
    "DegenerateSeriesError", "EllipseTest", "FitReport", "GobmError", "GobmParams",
    "InvalidCandidateError", "InvalidParameterError", "LogSeries", "NoValidThresholdError",
    "Regime", "SimulationSpec", "TestUnavailableError", "ThresholdScan", "classify_regime",
    "fit_at_threshold", "obm_density", "select_threshold", "simulate_logpath", "simulate_paths",
    "test_equal_volatility", "zero_drift_density",
]
