"""
Geometric oscillating Brownian motion: parameters, regimes and densities.

The log-price follows

    dX_t = sigma(X_t) dB_t + b(X_t) dt,

with ``sigma`` and ``b`` piecewise constant on either side of a threshold
``r``.  The point ``x = r`` belongs to the upper ("+") regime everywhere in
the package.  Prices are ``S = exp(X)`` and the price threshold is
``m = exp(r)``.

Units: time in years, volatilities per square-root year, drifts per year.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from gobm.errors import InvalidParameterError

DEFAULT_DT = 1.0 / 252.0

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def derive_drifts(mu_minus, mu_plus, sigma_minus, sigma_plus):
    """Map price appreciation rates to log-price drifts, ``b = mu - sigma**2 / 2``."""
    _check_sigmas(sigma_minus, sigma_plus)
    return mu_minus - 0.5 * sigma_minus**2, mu_plus - 0.5 * sigma_plus**2


def appreciation_rates(b_minus, b_plus, sigma_minus, sigma_plus):
    """Inverse of :func:`derive_drifts`."""
    _check_sigmas(sigma_minus, sigma_plus)
    return b_minus + 0.5 * sigma_minus**2, b_plus + 0.5 * sigma_plus**2


def _check_sigmas(*sigmas):
    for s in sigmas:
        if not (math.isfinite(s) and s > 0):
            raise InvalidParameterError(f"volatility must be finite and > 0, got {s!r}")


@dataclass(frozen=True)
class GobmParams:
    """Full model parameterization on the log-price scale.

    Use :meth:`from_rates` to build from price appreciation rates and a
    price threshold.
    """

    sigma_minus: float
    sigma_plus: float
    b_minus: float = 0.0
    b_plus: float = 0.0
    r: float = 0.0

    def __post_init__(self):
        _check_sigmas(self.sigma_minus, self.sigma_plus)
        for name in ("b_minus", "b_plus", "r"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")

    @classmethod
    def from_rates(cls, sigma_minus, sigma_plus, mu_minus=0.0, mu_plus=0.0, m=1.0):
        if not m > 0:
            raise InvalidParameterError(f"price threshold must be > 0, got {m!r}")
        b_minus, b_plus = derive_drifts(mu_minus, mu_plus, sigma_minus, sigma_plus)
        return cls(sigma_minus, sigma_plus, b_minus, b_plus, math.log(m))

    @property
    def m(self):
        return math.exp(self.r)

    @property
    def mu_minus(self):
        return self.b_minus + 0.5 * self.sigma_minus**2

    @property
    def mu_plus(self):
        return self.b_plus + 0.5 * self.sigma_plus**2

    @property
    def kappa(self):
        """Skewness of the associated skew Brownian motion."""
        return skewness(self.sigma_minus, self.sigma_plus)

    def sigma(self, x):
        return np.where(np.asarray(x) >= self.r, self.sigma_plus, self.sigma_minus)

    def drift(self, x):
        return np.where(np.asarray(x) >= self.r, self.b_plus, self.b_minus)

    def shifted(self, c):
        """Same dynamics with the threshold moved by ``c``."""
        return GobmParams(self.sigma_minus, self.sigma_plus, self.b_minus, self.b_plus, self.r + c)


@dataclass(frozen=True, eq=False)
class LogSeries:
    """Uniformly sampled log-prices ``X_0..X_n`` with step ``dt`` (years)."""

    values: np.ndarray
    dt: float = DEFAULT_DT

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.ndim != 1:
            raise InvalidParameterError("log series must be one-dimensional")
        if v.size < 2:
            raise InvalidParameterError("log series needs at least two observations (n >= 1)")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("log series contains non-finite values")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParameterError(f"dt must be > 0, got {self.dt!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size - 1

    @property
    def T(self):
        return self.n * self.dt

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, LogSeries):
            return NotImplemented
        return self.dt == other.dt and np.array_equal(self.values, other.values)

    __hash__ = None


class Regime(enum.Enum):
    ERGODIC = "E"
    NULL_RECURRENT_0 = "N0"
    NULL_RECURRENT_1 = "N1"
    TRANSIENT_0 = "T0"
    TRANSIENT_1 = "T1"

    @property
    def tag(self):
        return self.value


def classify_regime(b_minus, b_plus, dead_band=0.0):
    """Long-run regime from the signs of the two drifts.

    ``dead_band`` maps ``|b| < dead_band`` to zero; with the default of 0
    only exact zeros count as zero.
    """
    sm = _sign(b_minus, dead_band)
    sp = _sign(b_plus, dead_band)
    if sm > 0 and sp < 0:
        return Regime.ERGODIC
    if sm == 0 and sp == 0:
        return Regime.NULL_RECURRENT_0
    if (sm > 0 and sp == 0) or (sm == 0 and sp < 0):
        return Regime.NULL_RECURRENT_1
    if sm < 0 and sp > 0:
        return Regime.TRANSIENT_1
    return Regime.TRANSIENT_0


def _sign(b, dead_band):
    if not math.isfinite(b):
        raise InvalidParameterError(f"drift must be finite, got {b!r}")
    if abs(b) < dead_band or b == 0:
        return 0
    return 1 if b > 0 else -1


def skewness(sigma_minus, sigma_plus):
    return (sigma_minus - sigma_plus) / (sigma_minus + sigma_plus)


def _gauss(u, t):
    return np.exp(-0.5 * u * u / t) / (_SQRT_2PI * np.sqrt(t))


def zero_drift_density(t, x, y, sigma_minus, sigma_plus):
    r"""Transition density of the driftless OBM with threshold at 0.

    With ``s(u) = sigma_minus`` for ``u < 0`` and ``sigma_plus`` otherwise,
    ``phi(u) = u / s(u)`` maps the OBM onto a skew Brownian motion of
    parameter ``kappa``, whose density is pushed back through ``phi``:

    .. math::

        p_t(x, y) = \frac{1}{s(y)} \left[ g_t(\phi(y) - \phi(x))
            + \kappa\, \mathrm{sgn}(y)\, g_t(|\phi(x)| + |\phi(y)|) \right].

    All arguments broadcast.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma_minus = np.asarray(sigma_minus, dtype=float)
    sigma_plus = np.asarray(sigma_plus, dtype=float)
    upper_y = y >= 0
    sx = np.where(x >= 0, sigma_plus, sigma_minus)
    sy = np.where(upper_y, sigma_plus, sigma_minus)
    fx = x / sx
    fy = y / sy
    kappa = (sigma_minus - sigma_plus) / (sigma_minus + sigma_plus)
    skew = np.where(upper_y, kappa, -kappa) * _gauss(np.abs(fx) + np.abs(fy), t)
    return (_gauss(fy - fx, t) + skew) / sy


def log_zero_drift_density(t, x, y, sigma_minus, sigma_plus):
    """Logarithm of :func:`zero_drift_density`, computed without underflow.

    Since ``|phi(x)| + |phi(y)| >= |phi(y) - phi(x)|``, the skew term is a
    bounded multiple of the Gaussian term and factors out through ``log1p``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma_minus = np.asarray(sigma_minus, dtype=float)
    sigma_plus = np.asarray(sigma_plus, dtype=float)
    upper_y = y >= 0
    sx = np.where(x >= 0, sigma_plus, sigma_minus)
    sy = np.where(upper_y, sigma_plus, sigma_minus)
    fx = x / sx
    fy = y / sy
    kappa = (sigma_minus - sigma_plus) / (sigma_minus + sigma_plus)
    direct = fy - fx
    reflected = np.abs(fx) + np.abs(fy)
    ratio = np.exp(-0.5 * (reflected * reflected - direct * direct) / t)
    return (
        -0.5 * direct * direct / t
        - 0.5 * np.log(2.0 * math.pi * t)
        - np.log(sy)
        + np.log1p(np.where(upper_y, kappa, -kappa) * ratio)
    )


def zero_drift_cdf(t, x, y, sigma_minus, sigma_plus):
    """Distribution function ``P(X_t <= y | X_0 = x)`` matching :func:`zero_drift_density`."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = x / np.where(x >= 0, sigma_plus, sigma_minus)
    v = y / np.where(y >= 0, sigma_plus, sigma_minus)
    kappa = skewness(sigma_minus, sigma_plus)
    rt = math.sqrt(t)
    lower = ndtr((v - a) / rt) - kappa * ndtr((v - np.abs(a)) / rt)
    upper = ndtr((v - a) / rt) + kappa * (ndtr((np.abs(a) + v) / rt) - 1.0)
    return np.where(v < 0, lower, upper)


def obm_density(dt, x, y, params: GobmParams):
    """Approximate transition density of the drifted log-price over ``dt``.

    The drift is frozen at its value in the regime of the starting point
    ``x`` and applied as a deterministic shift of the driftless density.
    """
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt!r}")
    x = np.asarray(x, dtype=float)
    b = np.where(x >= params.r, params.b_plus, params.b_minus)
    out = zero_drift_density(
        dt, x - params.r, np.asarray(y, dtype=float) - params.r - b * dt,
        params.sigma_minus, params.sigma_plus,
    )
    return out[()] if out.ndim == 0 else out


def obm_log_density(dt, x, y, params: GobmParams):
    """Logarithm of :func:`obm_density`."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt!r}")
    x = np.asarray(x, dtype=float)
    b = np.where(x >= params.r, params.b_plus, params.b_minus)
    out = log_zero_drift_density(
        dt, x - params.r, np.asarray(y, dtype=float) - params.r - b * dt,
        params.sigma_minus, params.sigma_plus,
    )
    return out[()] if out.ndim == 0 else out
