import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from gobm.errors import InvalidParameterError
from gobm.mc import (
    PARAMETER_SETS,
    ExperimentSpec,
    analyze_path,
    density_mode,
    densities_csv,
    export_densities,
    run_experiment,
)
from gobm.model import GobmParams, LogSeries


def _schema(name):
    return json.loads(resources.files("gobm").joinpath("schemas", name).read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def small_set1():
    return run_experiment(ExperimentSpec(PARAMETER_SETS[1], n_paths=120, seed=5))


def test_table_sets():
    assert [(p.sigma_minus, p.sigma_plus) for p in PARAMETER_SETS.values()] == [(0.8, 0.3), (0.5, 0.3), (0.3, 0.3)]
    for p in PARAMETER_SETS.values():
        assert p.r == 0.0
        assert p.mu_minus == pytest.approx(0.0, abs=1e-15) and p.mu_plus == pytest.approx(0.0, abs=1e-15)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        ExperimentSpec(PARAMETER_SETS[1], n_paths=0)
    with pytest.raises(InvalidParameterError):
        ExperimentSpec(PARAMETER_SETS[1], years=0)
    with pytest.raises(InvalidParameterError):
        ExperimentSpec(PARAMETER_SETS[1], alpha=1.0)
    spec = ExperimentSpec(PARAMETER_SETS[1])
    assert spec.n_steps == 1260 and spec.dt == 1 / 252


def test_summary_accounting(small_set1):
    s = small_set1
    assert s.n_paths == 120
    assert [p.path_id for p in s.paths] == list(range(120))
    assert s.rejection_rate == sum(p.reject for p in s.paths) / 120
    assert s.aggregates["sigma_minus"]["count"] <= 120
    jsonschema.validate(s.to_dict(), _schema("mc_summary.schema.json"))


def test_paths_csv(small_set1):
    lines = small_set1.paths_csv().splitlines()
    assert lines[0] == "path_id,sigma_minus,sigma_plus,m_hat,b_minus,b_plus,reject"
    assert len(lines) == 121


def test_determinism_and_worker_independence():
    spec = ExperimentSpec(PARAMETER_SETS[2], n_paths=130, seed=9)
    a = run_experiment(spec)
    b = run_experiment(spec)
    c = run_experiment(spec, workers=3)
    assert a.to_json() == b.to_json() == c.to_json()
    assert a.paths_csv() == c.paths_csv()


def test_fixed_threshold_pipeline():
    s = run_experiment(ExperimentSpec(PARAMETER_SETS[1], n_paths=60, seed=3, search_threshold=False))
    assert all(p.m_hat == 1.0 for p in s.paths if np.isfinite(p.m_hat))


def test_exclusions_never_abort():
    # a path stuck on one side cannot be tested at the fixed threshold
    p = GobmParams(0.3, 0.3, 5.0, 5.0, r=-10.0)
    s = run_experiment(ExperimentSpec(p, n_paths=3, seed=0, search_threshold=False, years=1))
    assert s.n_excluded == 3 and s.rejection_rate == 0.0
    res = analyze_path(LogSeries(np.zeros(10), 1.0), ExperimentSpec(p, n_paths=1))
    assert res.excluded and not res.reject


def test_density_export(small_set1):
    tables = export_densities(small_set1)
    assert set(tables) == {"sigma_minus", "sigma_plus", "m_hat"}
    grid, dens = tables["sigma_minus"]
    assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)
    assert densities_csv(tables["m_hat"]).splitlines()[0] == "value,density"
    assert abs(density_mode(tables["m_hat"]) - 1.0) < 0.05


def test_density_export_refuses_single_path():
    s = run_experiment(ExperimentSpec(PARAMETER_SETS[1], n_paths=1, seed=0))
    with pytest.raises(InvalidParameterError, match="at least 2"):
        export_densities(s)


def test_rejection_ordering():
    rates = [run_experiment(ExperimentSpec(PARAMETER_SETS[k], n_paths=150, seed=k)).rejection_rate for k in (1, 2, 3)]
    assert rates[0] >= rates[1] - 0.1
    assert rates[1] > rates[2] + 0.3
