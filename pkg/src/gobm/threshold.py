"""
Threshold selection by approximate likelihood.

Every candidate threshold is fitted with the fixed-threshold estimators and
scored by summing the log of the frozen-drift transition density over the
observed transitions.  The candidate with the largest score wins; with a
fixed number of parameters this is the same as the AIC choice.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from gobm.errors import DegenerateSeriesError, InvalidCandidateError, InvalidParameterError, NoValidThresholdError
from gobm.estimators import FitReport, fit_arrays, reports_from_arrays
from gobm.model import LogSeries, log_zero_drift_density

DEFAULT_GRID_SIZE = 99
DEFAULT_MIN_SIDE_FRACTION = 0.05


def threshold_grid(X: LogSeries, k=DEFAULT_GRID_SIZE, min_side_fraction=DEFAULT_MIN_SIDE_FRACTION):
    """Empirical quantiles of ``X`` at ``k`` levels spread over
    ``[min_side_fraction, 1 - min_side_fraction]``, deduplicated and sorted.

    Quantiles are order statistics (no interpolation), so every candidate is
    an observed value.  Side membership then survives ``X -> X + c`` exactly,
    because rounding is monotone.  With ``k == 1`` the grid is the lower
    median.
    """
    if int(k) != k or k < 1:
        raise InvalidParameterError(f"grid size must be a positive integer, got {k!r}")
    if not 0 <= min_side_fraction < 0.5:
        raise InvalidParameterError("min_side_fraction must lie in [0, 0.5)")
    values = X.values
    if values.min() == values.max():
        raise DegenerateSeriesError("degenerate series: all log-prices are equal, no threshold grid")
    if k == 1:
        levels = np.array([0.5])
    else:
        levels = np.linspace(min_side_fraction, 1.0 - min_side_fraction, int(k))
    return np.unique(np.quantile(values, levels, method="inverted_cdf"))


def _logliks(X, rs, var_minus, var_plus, b_minus, b_plus, dt):
    x = X[None, :-1] - rs[:, None]
    y = X[None, 1:] - rs[:, None]
    drift = np.where(x >= 0, b_plus[:, None], b_minus[:, None])
    logp = log_zero_drift_density(
        dt, x, y - drift * dt, np.sqrt(var_minus)[:, None], np.sqrt(var_plus)[:, None]
    )
    return logp.sum(axis=1)


def approx_loglik(X: LogSeries, r, fit: FitReport):
    """Approximate log-likelihood of ``X`` under the fit obtained at ``r``."""
    if not fit.usable:
        raise InvalidCandidateError(f"fit at r={r!r} is flagged: {', '.join(fit.flags)}")
    ll = _logliks(
        X.values, np.array([float(r)]),
        np.array([fit.var_minus_hat]), np.array([fit.var_plus_hat]),
        np.array([fit.b_minus_hat]), np.array([fit.b_plus_hat]), X.dt,
    )[0]
    if not math.isfinite(ll):
        raise InvalidCandidateError(f"non-finite log-likelihood at r={r!r}")
    return float(ll)


def constant_model_loglik(X: LogSeries):
    """Log-likelihood of the drifted Brownian motion fitted by realized variance."""
    if X.n < 2:
        raise InvalidParameterError("need at least two increments")
    inc = np.diff(X.values)
    var = float(np.dot(inc, inc)) / X.T
    if not var > 0:
        raise DegenerateSeriesError("zero realized variance")
    b = (X.values[-1] - X.values[0]) / X.T
    resid = inc - b * X.dt
    return float(-0.5 * X.n * math.log(2.0 * math.pi * var * X.dt) - np.dot(resid, resid) / (2.0 * var * X.dt))


@dataclass
class Candidate:
    r: float
    fit: FitReport
    loglik: float | None

    @property
    def valid(self):
        return self.loglik is not None


@dataclass
class ThresholdScan:
    candidates: list
    best_index: int
    reference_loglik: float | None

    @property
    def best(self) -> Candidate:
        return self.candidates[self.best_index]

    @property
    def r_hat(self):
        return self.best.r

    @property
    def fit(self) -> FitReport:
        return self.best.fit

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "m", "loglik", "sigma_minus", "sigma_plus", "b_minus", "b_plus", "q_minus_frac", "flags"])
        for c in self.candidates:
            f = c.fit
            w.writerow([
                repr(c.r), repr(math.exp(c.r)),
                "" if c.loglik is None else repr(c.loglik),
                _num(f.sigma_minus_hat), _num(f.sigma_plus_hat),
                _num(f.b_minus_hat), _num(f.b_plus_hat),
                repr(f.q_minus_frac), ";".join(f.flags),
            ])
        return buf.getvalue()

    def summary(self):
        b = self.best
        return {
            "best_index": self.best_index,
            "r_hat": b.r,
            "m_hat": math.exp(b.r),
            "loglik": b.loglik,
            "reference_loglik": self.reference_loglik,
            "n_candidates": len(self.candidates),
            "n_valid": sum(c.valid for c in self.candidates),
        }

    def summary_json(self):
        return json.dumps(self.summary(), sort_keys=True)


def _num(v):
    return repr(float(v)) if math.isfinite(v) else ""


def scan_thresholds(X: LogSeries, grid, local_time_weight=1.0) -> ThresholdScan:
    """Fit and score every threshold of ``grid`` and pick the best."""
    rs = np.unique(np.asarray(grid, dtype=float))
    if rs.size == 0:
        raise NoValidThresholdError("empty threshold grid")
    est = fit_arrays(X.values, rs, X.dt, local_time_weight)
    reports = reports_from_arrays(est, X.n, X.dt)
    ok = np.array([rep.usable for rep in reports])
    ll = np.full(rs.size, -np.inf)
    if ok.any():
        ll[ok] = _logliks(
            X.values, rs[ok], est["var_minus"][ok], est["var_plus"][ok],
            est["b_minus"][ok], est["b_plus"][ok], X.dt,
        )
    ok &= np.isfinite(ll)
    if not ok.any():
        raise NoValidThresholdError("no threshold candidate yields a usable fit")
    candidates = []
    for j, rep in enumerate(reports):
        value = float(ll[j]) if ok[j] else None
        rep.loglik = value
        candidates.append(Candidate(float(rs[j]), rep, value))
    best = _argmax_with_tiebreak(rs, np.where(ok, ll, -np.inf), float(np.median(X.values)))
    try:
        reference = constant_model_loglik(X)
    except (DegenerateSeriesError, InvalidParameterError):
        reference = None
    return ThresholdScan(candidates, best, reference)


def _argmax_with_tiebreak(rs, ll, median):
    top = np.flatnonzero(ll == ll.max())
    # exact ties: nearest to the median log-price, then the lower threshold
    dist = np.abs(rs[top] - median)
    return int(top[np.flatnonzero(dist == dist.min())[0]])


def select_threshold(X: LogSeries, k=DEFAULT_GRID_SIZE, min_side_fraction=DEFAULT_MIN_SIDE_FRACTION,
                     local_time_weight=1.0) -> ThresholdScan:
    grid = threshold_grid(X, k, min_side_fraction)
    return scan_thresholds(X, grid, local_time_weight)
