"""Confidence ellipse for the two variance estimates and the equal-volatility test.

Given the fit, the variance pair is asymptotically

    (v_-, v_+) ~ (sigma_-^2, sigma_+^2) + diag(a_-, a_+) G / q_alpha,

with ``a_± = q_alpha * sqrt(2 T / n) * v_± / sqrt(Q_±)`` and ``G`` a standard
bivariate normal.  The region is the axis-aligned ellipse with these
semi-axes; equality is rejected when the diagonal misses it, which happens
exactly when ``|v_+ - v_-| > sqrt(a_-**2 + a_+**2)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from gobm.errors import InvalidParameterError, TestUnavailableError
from gobm.estimators import FitReport

DEFAULT_ALPHA = 0.05


def q_alpha(alpha):
    """Radius with ``P(|G| <= q) = 1 - alpha`` for a standard 2-d Gaussian."""
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    return math.sqrt(-2.0 * math.log(alpha))


@dataclass(frozen=True)
class EllipseTest:
    center: tuple
    semi_axis_minus: float
    semi_axis_plus: float
    alpha: float
    q_alpha: float
    reject: bool | None = None

    __test__ = False

    def boundary(self, samples=360):
        theta = 2.0 * math.pi * np.arange(samples) / samples
        x = self.center[0] + self.semi_axis_minus * np.cos(theta)
        y = self.center[1] + self.semi_axis_plus * np.sin(theta)
        return theta, x, y

    def boundary_csv(self, samples=360):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "x", "y"])
        for row in zip(*self.boundary(samples)):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "q_alpha": self.q_alpha,
            "center": list(self.center),
            "semi_axes": [self.semi_axis_minus, self.semi_axis_plus],
            "reject": self.reject,
        }


def confidence_ellipse(fit: FitReport, alpha=DEFAULT_ALPHA) -> EllipseTest:
    if not (fit.q_minus > 0 and fit.q_plus > 0):
        raise TestUnavailableError("both sides need positive occupation time")
    vm, vp = fit.var_minus_hat, fit.var_plus_hat
    if not (vm > 0 and vp > 0):
        raise TestUnavailableError("both variance estimates must be positive")
    q = q_alpha(alpha)
    scale = q / math.sqrt(fit.n) * math.sqrt(2.0 * fit.T)
    return EllipseTest(
        center=(vm, vp),
        semi_axis_minus=scale * vm / math.sqrt(fit.q_minus),
        semi_axis_plus=scale * vp / math.sqrt(fit.q_plus),
        alpha=alpha,
        q_alpha=q,
    )


def diagonal_misses(center, semi_axis_minus, semi_axis_plus):
    return abs(center[1] - center[0]) > math.hypot(semi_axis_minus, semi_axis_plus)


def test_equal_volatility(fit: FitReport, alpha=DEFAULT_ALPHA) -> EllipseTest:
    """Decide ``sigma_- == sigma_+`` from the fit at its threshold."""
    ell = confidence_ellipse(fit, alpha)
    reject = diagonal_misses(ell.center, ell.semi_axis_minus, ell.semi_axis_plus)
    return EllipseTest(ell.center, ell.semi_axis_minus, ell.semi_axis_plus, alpha, ell.q_alpha, reject)


test_equal_volatility.__test__ = False
