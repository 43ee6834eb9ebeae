"""
Monte Carlo studies: simulate paths, select the threshold (or keep it
fixed), estimate, and run the equal-volatility test on every path.

Work is split into fixed blocks of paths.  Path ``i`` always uses stream
``(seed, i)``, so the summary is the same for any number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from gobm.errors import GobmError, InvalidParameterError
from gobm.estimators import fit_at_threshold
from gobm.model import GobmParams, LogSeries
from gobm.nonparam import kde
from gobm.simulate import SimulationSpec, simulate_paths
from gobm.threshold import DEFAULT_GRID_SIZE, DEFAULT_MIN_SIDE_FRACTION, select_threshold
from gobm.voltest import DEFAULT_ALPHA, test_equal_volatility

# yearly parameter sets, appreciation rates 0, price threshold 1, S0 = 1
PARAMETER_SETS = {
    1: GobmParams.from_rates(0.80, 0.30, 0.0, 0.0, m=1.0),
    2: GobmParams.from_rates(0.50, 0.30, 0.0, 0.0, m=1.0),
    3: GobmParams.from_rates(0.30, 0.30, 0.0, 0.0, m=1.0),
}

BLOCK = 50


@dataclass(frozen=True)
class ExperimentSpec:
    params: GobmParams
    n_paths: int = 1000
    years: float = 5.0
    observations_per_year: int = 252
    alpha: float = DEFAULT_ALPHA
    seed: int = 0
    search_threshold: bool = True
    x0: float = 0.0
    grid_size: int = DEFAULT_GRID_SIZE
    min_side_fraction: float = DEFAULT_MIN_SIDE_FRACTION

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise InvalidParameterError("n_paths must be a positive integer")
        if not self.years > 0:
            raise InvalidParameterError("years must be > 0")
        if int(self.observations_per_year) != self.observations_per_year or self.observations_per_year < 1:
            raise InvalidParameterError("observations_per_year must be a positive integer")
        if not 0 < self.alpha < 1:
            raise InvalidParameterError("alpha must lie in (0, 1)")

    @property
    def dt(self):
        return 1.0 / self.observations_per_year

    @property
    def n_steps(self):
        return int(round(self.years * self.observations_per_year))

    def simulation(self):
        return SimulationSpec(self.params, x0=self.x0, n=self.n_steps, dt=self.dt, seed=self.seed)


@dataclass(frozen=True)
class PathResult:
    path_id: int
    sigma_minus: float
    sigma_plus: float
    m_hat: float
    b_minus: float
    b_plus: float
    reject: bool
    regime: str | None = None
    excluded: str | None = None


@dataclass
class ExperimentSummary:
    spec: ExperimentSpec
    paths: list
    aggregates: dict = field(default_factory=dict)

    @property
    def n_paths(self):
        return len(self.paths)

    @property
    def n_excluded(self):
        return sum(p.excluded is not None for p in self.paths)

    @property
    def rejection_rate(self):
        return sum(p.reject for p in self.paths) / len(self.paths)

    def column(self, name):
        return np.array([getattr(p, name) for p in self.paths], dtype=float)

    def to_dict(self):
        return {
            "spec": asdict(self.spec),
            "n_paths": self.n_paths,
            "n_excluded": self.n_excluded,
            "rejection_rate": self.rejection_rate,
            "aggregates": self.aggregates,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def paths_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path_id", "sigma_minus", "sigma_plus", "m_hat", "b_minus", "b_plus", "reject"])
        for p in self.paths:
            w.writerow([p.path_id, _fmt(p.sigma_minus), _fmt(p.sigma_plus), _fmt(p.m_hat),
                        _fmt(p.b_minus), _fmt(p.b_plus), int(p.reject)])
        return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if math.isfinite(v) else ""


def _aggregate(values):
    v = values[np.isfinite(values)]
    if v.size == 0:
        return {"count": 0}
    q05, q25, q50, q75, q95 = np.quantile(v, [0.05, 0.25, 0.5, 0.75, 0.95])
    return {"count": int(v.size), "mean": float(v.mean()), "median": float(q50), "sd": float(v.std(ddof=0)),
            "q05": float(q05), "q25": float(q25), "q75": float(q75), "q95": float(q95)}


def analyze_path(X: LogSeries, spec: ExperimentSpec, path_id=0) -> PathResult:
    """Estimation and test for one path; failures become exclusions."""
    nan = math.nan
    try:
        if spec.search_threshold:
            fit = select_threshold(X, spec.grid_size, spec.min_side_fraction).fit
        else:
            fit = fit_at_threshold(X, spec.params.r)
    except GobmError as exc:
        return PathResult(path_id, nan, nan, nan, nan, nan, False, None, str(exc))
    try:
        reject = bool(test_equal_volatility(fit, spec.alpha).reject)
        excluded = None
    except GobmError as exc:
        reject, excluded = False, str(exc)
    return PathResult(
        path_id, fit.sigma_minus_hat, fit.sigma_plus_hat, fit.m, fit.b_minus_hat, fit.b_plus_hat,
        reject, fit.regime.tag if fit.regime is not None else None, excluded,
    )


def _run_block(spec: ExperimentSpec, start, size):
    sim = spec.simulation()
    paths = simulate_paths(sim, size, first_index=start)
    return [analyze_path(LogSeries(paths[i], sim.dt), spec, start + i) for i in range(size)]


def run_experiment(spec: ExperimentSpec, workers=1) -> ExperimentSummary:
    starts = list(range(0, spec.n_paths, BLOCK))
    sizes = [min(BLOCK, spec.n_paths - s) for s in starts]
    if workers <= 1:
        blocks = [_run_block(spec, s, k) for s, k in zip(starts, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda a: _run_block(spec, *a), zip(starts, sizes)))
    results = [r for block in blocks for r in block]
    summary = ExperimentSummary(spec, results)
    summary.aggregates = {
        name: _aggregate(summary.column(name))
        for name in ("sigma_minus", "sigma_plus", "m_hat", "b_minus", "b_plus")
    }
    return summary


def export_densities(summary: ExperimentSummary, size=201):
    """Kernel density tables ``{name: (grid, density)}`` for the per-path
    estimates of ``sigma_minus``, ``sigma_plus`` and ``m_hat``."""
    out = {}
    for name in ("sigma_minus", "sigma_plus", "m_hat"):
        values = summary.column(name)
        values = values[np.isfinite(values)]
        if values.size < 2:
            raise InvalidParameterError(
                f"cannot estimate the density of {name} from {values.size} path(s); need at least 2"
            )
        grid, dens, _ = kde(values, size=size)
        out[name] = (grid, dens)
    return out


def density_mode(table):
    grid, dens = table
    return float(grid[int(np.argmax(dens))])


def densities_csv(table):
    grid, dens = table
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "density"])
    for g, d in zip(grid, dens):
        w.writerow([repr(float(g)), repr(float(d))])
    return buf.getvalue()
