"""Nadaraya-Watson estimates of the local drift and squared volatility."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from gobm.errors import InvalidParameterError
from gobm.model import LogSeries

MIN_KERNEL_MASS = 1e-12


def gaussian_kernel(u, h):
    return np.exp(-0.5 * (u / h) ** 2) / (h * math.sqrt(2.0 * math.pi))


def normal_reference_bandwidth(values):
    """Silverman's rule ``1.06 * sd * n**(-1/5)``."""
    values = np.asarray(values, dtype=float)
    return 1.06 * float(np.std(values, ddof=1)) * values.size ** (-0.2)


def default_grid(values, size=101):
    lo, hi = np.quantile(values, [0.02, 0.98])
    return np.linspace(lo, hi, size)


def kde(samples, grid=None, bandwidth=None, size=201):
    """Gaussian kernel density estimate; returns ``(grid, density, bandwidth)``."""
    samples = np.asarray(samples, dtype=float)
    samples = samples[np.isfinite(samples)]
    if samples.size < 2:
        raise InvalidParameterError(f"density estimate needs at least 2 finite samples, got {samples.size}")
    h = normal_reference_bandwidth(samples) if bandwidth is None else bandwidth
    if not h > 0:
        raise InvalidParameterError("samples are constant; bandwidth would be zero")
    if grid is None:
        grid = np.linspace(samples.min() - 3 * h, samples.max() + 3 * h, size)
    dens = gaussian_kernel(grid[:, None] - samples[None, :], h).mean(axis=1)
    return grid, dens, h


@dataclass(frozen=True)
class CurveEstimate:
    grid: np.ndarray
    sigma2: np.ndarray
    drift: np.ndarray
    bandwidth: float
    missing: np.ndarray

    @property
    def sigma(self):
        return np.sqrt(self.sigma2)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "sigma2", "sigma", "drift", "missing"])
        for x, s2, s, b, miss in zip(self.grid, self.sigma2, self.sigma, self.drift, self.missing):
            if miss:
                w.writerow([repr(float(x)), "", "", "", 1])
            else:
                w.writerow([repr(float(x)), repr(float(s2)), repr(float(s)), repr(float(b)), 0])
        return buf.getvalue()


def nw_estimate(X: LogSeries, bandwidth=None, grid=None) -> CurveEstimate:
    """Kernel-weighted increment moments at each grid point.

    ``drift(x) = sum K(X_i - x) dX_i / (dt sum K)`` and
    ``sigma2(x) = sum K(X_i - x) dX_i**2 / (dt sum K)`` over ``i < n``.
    Grid points with kernel mass below 1e-12 are marked missing (NaN).
    """
    if X.n < 2:
        raise InvalidParameterError("need at least two increments")
    values = X.values
    h = normal_reference_bandwidth(values) if bandwidth is None else float(bandwidth)
    if not (math.isfinite(h) and h > 0):
        raise InvalidParameterError(f"bandwidth must be > 0, got {h!r}")
    grid = default_grid(values) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InvalidParameterError("empty evaluation grid")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("grid must be strictly increasing")

    left = values[:-1]
    inc = np.diff(values)
    u = (left[None, :] - grid[:, None]) / h
    # the kernel constant cancels in the ratios; keep it only for the mass test
    w = np.exp(-0.5 * u * u)
    wsum = w.sum(axis=1)
    mass = wsum / (h * math.sqrt(2.0 * math.pi))
    missing = mass < MIN_KERNEL_MASS
    with np.errstate(invalid="ignore", divide="ignore"):
        drift = (w @ inc) / (X.dt * wsum)
        sigma2 = (w @ (inc * inc)) / (X.dt * wsum)
    drift[missing] = np.nan
    sigma2[missing] = np.nan
    return CurveEstimate(grid=grid, sigma2=sigma2, drift=drift, bandwidth=h, missing=missing)
