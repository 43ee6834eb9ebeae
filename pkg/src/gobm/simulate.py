"""Euler simulation of GOBM log-price and price paths.

Each path draws its Gaussian innovations from its own Philox stream keyed by
``(seed, path_index)``, so a path is the same whether it is generated alone,
inside a batch, or on another worker.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from gobm.errors import InvalidParameterError
from gobm.model import DEFAULT_DT, GobmParams, LogSeries


@dataclass(frozen=True)
class SimulationSpec:
    params: GobmParams
    x0: float = 0.0
    n: int = 1260
    dt: float = DEFAULT_DT
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidParameterError(f"dt must be > 0, got {self.dt!r}")
        if int(self.n) != self.n or self.n < 0:
            raise InvalidParameterError(f"n must be a non-negative integer, got {self.n!r}")
        if not math.isfinite(self.x0):
            raise InvalidParameterError("x0 must be finite")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError("seed must fit in 64 unsigned bits")

    @classmethod
    def for_horizon(cls, params, years, dt=DEFAULT_DT, x0=0.0, seed=0):
        return cls(params, x0=x0, n=int(round(years / dt)), dt=dt, seed=seed)

    @property
    def horizon(self):
        return self.n * self.dt


def path_rng(seed, index):
    """Generator for path ``index`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def euler_paths(params: GobmParams, x0, dt, innovations):
    """Run the Euler recursion over rows of standard normal ``innovations``.

    ``innovations`` has shape ``(paths, n)``; the result has shape
    ``(paths, n + 1)`` with the initial value in column 0.
    """
    eta = np.atleast_2d(np.asarray(innovations, dtype=float))
    paths, n = eta.shape
    out = np.empty((paths, n + 1))
    out[:, 0] = x0
    sqrt_dt = math.sqrt(dt)
    sm, sp, bm, bp, r = params.sigma_minus, params.sigma_plus, params.b_minus, params.b_plus, params.r
    for k in range(n):
        x = out[:, k]
        upper = x >= r
        out[:, k + 1] = x + sqrt_dt * np.where(upper, sp, sm) * eta[:, k] + np.where(upper, bp, bm) * dt
    return out


def simulate_paths(spec: SimulationSpec, n_paths, first_index=0):
    """Simulate paths ``first_index .. first_index + n_paths - 1`` of ``spec``."""
    eta = np.empty((n_paths, spec.n))
    for i in range(n_paths):
        eta[i] = path_rng(spec.seed, first_index + i).standard_normal(spec.n)
    return euler_paths(spec.params, spec.x0, spec.dt, eta)


def simulate_logpath(spec: SimulationSpec, path_index=0) -> LogSeries | np.ndarray:
    """One log-price path.

    A zero-step path cannot form a :class:`LogSeries` (which needs n >= 1), so
    for ``spec.n == 0`` the single-element array ``[x0]`` is returned instead.
    """
    values = simulate_paths(spec, 1, first_index=path_index)[0]
    if spec.n == 0:
        return values
    return LogSeries(values, spec.dt)


def simulate_pricepath(spec: SimulationSpec, path_index=0):
    path = simulate_logpath(spec, path_index)
    values = path.values if isinstance(path, LogSeries) else path
    return np.exp(values)


def euler_endpoints(params: GobmParams, x0, t, h, n_paths, seed=0, block=100_000):
    """Endpoints ``X_t`` of many Euler paths with step ``h``.

    Paths are generated in fixed blocks, block ``j`` drawing from stream
    ``(seed, j)``; memory stays at one block of states.
    """
    steps = int(round(t / h))
    if steps < 1:
        raise InvalidParameterError("horizon must cover at least one step")
    dt = t / steps
    sqrt_h = math.sqrt(dt)
    # per-step coefficients as ``low + jump * (x >= r)``
    s_lo, s_jump = sqrt_h * params.sigma_minus, sqrt_h * (params.sigma_plus - params.sigma_minus)
    b_lo, b_jump = params.b_minus * dt, (params.b_plus - params.b_minus) * dt
    out = np.empty(n_paths)
    for j, start in enumerate(range(0, n_paths, block)):
        size = min(block, n_paths - start)
        rng = path_rng(seed, j)
        x = np.full(size, float(x0))
        up = np.empty(size)
        eta = np.empty(size)
        for _ in range(steps):
            np.greater_equal(x, params.r, out=up)
            rng.standard_normal(out=eta)
            eta *= s_lo + s_jump * up
            x += eta
            x += b_lo + b_jump * up
        out[start:start + size] = x
    return out


def path_csv(values, dt):
    """Render a log-price path as ``step,time,logprice,price`` CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", "time", "logprice", "price"])
    for k, x in enumerate(np.asarray(values, dtype=float)):
        writer.writerow([k, repr(k * dt), repr(float(x)), repr(float(math.exp(x)))])
    return buf.getvalue()
