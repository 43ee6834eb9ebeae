"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``; the lines
are repeated in the "acceptance criteria" section at the end of the report.
All Monte Carlo runs use seed 0.
"""

import math
import os
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kstest, norm

from gobm.data_io import load_log_series, read_manifest
from gobm.estimators import (
    discrete_local_time,
    estimate_drift,
    fit_arrays,
    fit_at_threshold,
    occupation_times,
    signed_covariation,
)
from gobm.mc import PARAMETER_SETS, ExperimentSpec, run_experiment
from gobm.model import GobmParams, LogSeries, classify_regime, obm_density, zero_drift_cdf, zero_drift_density
from gobm.simulate import SimulationSpec, euler_endpoints, simulate_logpath, simulate_paths
from gobm.threshold import select_threshold
from gobm.voltest import test_equal_volatility

SEED = 0


def report(record_property, number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)
    record_property("acceptance", line)
    return ok


@pytest.fixture(scope="module")
def set_runs():
    return {k: run_experiment(ExperimentSpec(PARAMETER_SETS[k], n_paths=1000, seed=SEED)) for k in (1, 2, 3)}


# ------------------------------------------------------------ 1

def test_criterion_1_rejection_rates(set_runs, record_property):
    targets = {1: 0.81, 2: 0.81, 3: 0.14}
    counts = {k: sum(p.reject for p in set_runs[k].paths) for k in targets}
    # +-5 percentage points of 1000 paths, compared on counts
    ok = all(abs(counts[k] - round(1000 * targets[k])) <= 50 for k in targets)
    detail = ", ".join(f"set {k} {counts[k] / 10:.1f}% (target {targets[k]:.0%} +-5pp)" for k in targets)
    assert report(record_property, 1, ok, "rejection rates " + detail)


# ------------------------------------------------------------ 2

def test_criterion_2_set1_concentration(set_runs, record_property):
    agg = set_runs[1].aggregates
    sm, sp, m = agg["sigma_minus"]["mean"], agg["sigma_plus"]["mean"], agg["m_hat"]["median"]
    checks = [0.78 <= sm <= 0.82, 0.29 <= sp <= 0.31, 0.95 <= m <= 1.05]
    detail = (f"mean sigma_minus {sm:.4f} in [0.78, 0.82]: {checks[0]}; "
              f"mean sigma_plus {sp:.4f} in [0.29, 0.31]: {checks[1]}; "
              f"median m {m:.4f} in [0.95, 1.05]: {checks[2]}")
    assert report(record_property, 2, all(checks), detail)


# ------------------------------------------------------------ 3

def test_criterion_3_fixed_threshold_size(record_property):
    s = run_experiment(ExperimentSpec(PARAMETER_SETS[3], n_paths=2000, seed=SEED, search_threshold=False))
    rejects = sum(p.reject for p in s.paths)
    ok = 60 <= rejects <= 140  # 5% +- 2pp of 2000 paths
    detail = (f"rejection rate {rejects}/2000 = {rejects / 20:.2f}% (target 5% +-2pp); "
              f"{s.n_excluded} paths without both sides counted as non-rejections")
    assert report(record_property, 3, ok, detail)


# ------------------------------------------------------------ 4

def test_criterion_4_hand_identities(record_property):
    xi = LogSeries(np.array([0.1, -0.2, 0.3]), 1.0)
    q = occupation_times(xi)
    cov = signed_covariation(xi)
    lt = discrete_local_time(xi)
    beta = estimate_drift(xi, local_time_weight=0.5)
    qv = float(np.sum(np.diff(xi.values) ** 2))
    checks = [
        q == (1.0, 1.0),
        abs(cov[0] + 0.16) <= 1e-15 and abs(cov[1] - 0.18) <= 1e-15,
        abs(lt - 0.5) <= 1e-15,
        abs(beta[0] - 0.25) <= 1e-15 and abs(beta[1] + 0.05) <= 1e-15,
        abs((cov[1] - cov[0]) - 0.34) <= 1e-12 and abs(qv - 0.34) <= 1e-12,
    ]
    default = estimate_drift(xi)
    detail = (f"Q=({q[0]:g}, {q[1]:g}), cov=({cov[0]:.15g}, {cov[1]:.15g}), L={lt:.15g}, "
              f"beta=({beta[0]:.15g}, {beta[1]:.15g}) with the halved local time "
              f"(default weight gives ({default[0]:.15g}, {default[1]:.15g})), "
              f"cov+ - cov- = {cov[1] - cov[0]:.15g}")
    assert report(record_property, 4, all(checks), detail)


# ------------------------------------------------------------ 5

def _normalization_error():
    cases = [
        (1 / 252, 0.0, GobmParams(0.8, 0.3, -0.32, -0.045)),
        (1 / 252, -0.05, GobmParams(0.8, 0.3, 0.5, -0.5)),
        (1.0, 0.0, GobmParams(2.0, 1.0)),
        (0.5, 0.2, GobmParams(0.3, 1.5, 0.1, 0.4, r=0.1)),
        (2.0, -1.0, GobmParams(2.0, 0.2, -0.3, 0.0, r=0.5)),
    ]
    worst = 0.0
    for dt, x, p in cases:
        jump = p.r + p.drift(x) * dt
        scale = max(p.sigma_minus, p.sigma_plus) * math.sqrt(dt)
        pts = sorted({x - 40 * scale, jump, x, x + 40 * scale})
        total = sum(quad(lambda y: obm_density(dt, x, y, p), a, b, limit=200, epsabs=1e-13)[0]
                    for a, b in zip(pts, pts[1:]))
        worst = max(worst, abs(total - 1.0))
    return worst


def _gaussian_reduction_error():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(2000):
        s, b, dt = rng.uniform(0.2, 2.0), rng.uniform(-1, 1), rng.uniform(0.05, 2.0)
        x, r = rng.uniform(-2, 2, 2)
        y = x + b * dt + rng.normal() * s * math.sqrt(dt)
        p = GobmParams(s, s, b, b, r=r)
        worst = max(worst, abs(obm_density(dt, x, y, p) - norm.pdf(y, x + b * dt, s * math.sqrt(dt))))
    return worst


def _chapman_kolmogorov_error():
    worst = 0.0
    for s, t, x, y, sm, sp in [(0.3, 0.7, 0.0, 0.0, 2.0, 1.0), (0.5, 0.5, -0.4, 0.3, 0.8, 0.3),
                               (0.2, 1.0, 0.5, -0.6, 0.3, 1.2)]:
        def f(z):
            return zero_drift_density(s, x, z, sm, sp) * zero_drift_density(t, z, y, sm, sp)
        lim = 12 * max(sm, sp) * math.sqrt(s + t) + abs(x) + abs(y)
        pts = sorted({-lim, min(x, y, 0.0), 0.0, max(x, y, 0.0), lim})
        lhs = sum(quad(f, a, b, limit=200, epsabs=1e-12)[0] for a, b in zip(pts, pts[1:]))
        worst = max(worst, abs(lhs - float(zero_drift_density(s + t, x, y, sm, sp))))
    return worst


def test_criterion_5_density(record_property):
    norm_err = _normalization_error()
    gauss_err = _gaussian_reduction_error()
    ck_err = _chapman_kolmogorov_error()
    # one unit of time from the threshold, Euler step 1e-4
    xt = euler_endpoints(GobmParams(2.0, 1.0), 0.0, 1.0, 1e-4, 1_000_000, seed=SEED)
    ks = kstest(xt, lambda y: zero_drift_cdf(1.0, 0.0, y, 2.0, 1.0)).statistic
    checks = [norm_err <= 1e-6, gauss_err <= 1e-12, ck_err <= 1e-4, ks < 0.01]
    detail = (f"normalization {norm_err:.1e} (<=1e-6), Gaussian reduction {gauss_err:.1e} (<=1e-12), "
              f"Chapman-Kolmogorov {ck_err:.1e} (<=1e-4), KS {ks:.4f} (<0.01, 1e6 paths, t=1, h=1e-4)")
    assert report(record_property, 5, all(checks), detail)


# ------------------------------------------------------------ 6

def _drift_errors(years, n_paths=1000):
    p = GobmParams(0.3, 0.3, 0.5, -0.5)
    spec = SimulationSpec(p, n=int(years * 252), dt=1 / 252, seed=SEED)
    bm, bp, ergodic = [], [], 0
    for start in range(0, n_paths, 50):
        for x in simulate_paths(spec, 50, first_index=start):
            est = fit_arrays(x, [0.0], spec.dt)
            b1, b2 = float(est["b_minus"][0]), float(est["b_plus"][0])
            bm.append(b1)
            bp.append(b2)
            ergodic += classify_regime(b1, b2).tag == "E"
    rmse = (math.sqrt(np.mean((np.array(bm) - 0.5) ** 2)), math.sqrt(np.mean((np.array(bp) + 0.5) ** 2)))
    return rmse, ergodic / n_paths


def test_criterion_6_ergodic_drift(record_property):
    (m50, p50), e50 = _drift_errors(50)
    (m100, p100), e100 = _drift_errors(100)
    ratios = (m50 / m100, p50 / p100)
    lo, hi = math.sqrt(2) * 0.85, math.sqrt(2) * 1.15
    checks = [lo <= r <= hi for r in ratios] + [e50 > 0.99, e100 > 0.99]
    detail = (f"RMSE ratio T=50/T=100: b_minus {ratios[0]:.3f}, b_plus {ratios[1]:.3f} "
              f"(sqrt2 +-15% = [{lo:.3f}, {hi:.3f}]); ergodic {e50:.1%} at T=50, {e100:.1%} at T=100")
    assert report(record_property, 6, all(checks), detail)


# ------------------------------------------------------------ 7

def _close(a, b, tol=1e-9):
    return all(
        (x is None and y is None) or x == y or (isinstance(x, float) and abs(x - y) <= tol * max(1.0, abs(x)))
        for x, y in zip(a, b)
    )


def _property_failures():
    failures = []
    p = PARAMETER_SETS[1]
    paths = [simulate_logpath(SimulationSpec(p, n=1260, seed=SEED), i) for i in range(5)]
    keys = ("var_minus_hat", "var_plus_hat", "b_minus_hat", "b_plus_hat", "q_minus", "q_plus",
            "cov_minus", "cov_plus", "local_time_hat")
    for i, X in enumerate(paths):
        for c in (-1.3, 2.7):
            Y = LogSeries(X.values + c, X.dt)
            a, b = fit_at_threshold(X, 0.01).to_dict(), fit_at_threshold(Y, 0.01 + c).to_dict()
            if not _close([a[k] for k in keys], [b[k] for k in keys]):
                failures.append(f"fit shift path {i}")
            sa, sb = select_threshold(X), select_threshold(Y)
            if abs(sb.r_hat - sa.r_hat - c) > 1e-9 or not _close(
                    [x.loglik for x in sa.candidates], [y.loglik for y in sb.candidates]):
                failures.append(f"selection shift path {i}")
        # time-unit change: rates scale with 1/lam, times with lam, choice unchanged
        lam = 7.0
        Z = LogSeries(X.values, X.dt * lam)
        a, b = fit_at_threshold(X, 0.01), fit_at_threshold(Z, 0.01)
        if not _close([a.var_minus_hat / lam, a.b_plus_hat / lam, a.q_plus * lam],
                      [b.var_minus_hat, b.b_plus_hat, b.q_plus]):
            failures.append(f"time scale path {i}")
        if select_threshold(X).r_hat != select_threshold(Z).r_hat:
            failures.append(f"time scale selection path {i}")
        if test_equal_volatility(a).reject != test_equal_volatility(b).reject:
            failures.append(f"time scale test path {i}")
        for cand in select_threshold(X).candidates:
            f = cand.fit
            if abs(f.q_minus + f.q_plus - f.T) > 1e-12 * f.T:
                failures.append(f"partition path {i}")
                break
    spec = SimulationSpec(p, n=500, seed=SEED)
    if not np.array_equal(simulate_paths(spec, 20), simulate_paths(spec, 20)):
        failures.append("simulation determinism")
    es = ExperimentSpec(PARAMETER_SETS[2], n_paths=200, seed=SEED)
    one, four, again = run_experiment(es, workers=1), run_experiment(es, workers=4), run_experiment(es, workers=1)
    if one.to_json() != again.to_json():
        failures.append("experiment determinism")
    if (one.to_json(), one.paths_csv()) != (four.to_json(), four.paths_csv()):
        failures.append("schedule independence")
    return failures


def test_criterion_7_properties(record_property):
    failures = _property_failures()
    detail = ("shift and time-unit equivariance, partition, determinism, 1 vs 4 workers byte-identical"
              if not failures else "violations: " + "; ".join(failures))
    assert report(record_property, 7, not failures, detail)


# ------------------------------------------------------------ 8

def test_criterion_8_empirical(record_property):
    root = os.environ.get("GOBM_EMPIRICAL_DIR")
    manifest = Path(root) / "manifest.csv" if root else None
    if manifest is None or not manifest.exists():
        line = "SKIP criterion 8: set GOBM_EMPIRICAL_DIR to a folder with manifest.csv (non-blocking)"
        print(line)
        record_property("acceptance", line)
        pytest.skip("no empirical dataset")
    rows = read_manifest(manifest)
    asym = rejects = 0
    for _, path in rows:
        fit = select_threshold(load_log_series(path)).fit
        asym += fit.sigma_minus_hat > fit.sigma_plus_hat
        rejects += bool(test_equal_volatility(fit).reject)
    n = len(rows)
    need = n - 2
    ok = asym >= need and rejects >= need
    detail = f"sigma_minus > sigma_plus for {asym}/{n}, equal-volatility rejected for {rejects}/{n} (need >= {need})"
    assert report(record_property, 8, ok, detail)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
