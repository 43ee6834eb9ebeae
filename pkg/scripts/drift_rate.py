"""Drift recovery in the mean-reverting regime as the horizon grows.

For each horizon, fits many daily paths at the true threshold and prints the
root-mean-square error of both drift estimates.  The error should shrink like
``1 / sqrt(T)``: a ratio near 1.41 between consecutive doublings.

    python3 scripts/drift_rate.py --horizons 25 50 100 --paths 1000
"""

import argparse
import math

import numpy as np

from gobm.estimators import fit_arrays
from gobm.model import GobmParams, classify_regime
from gobm.simulate import SimulationSpec, simulate_paths


def drift_rmse(params, years, n_paths, seed, weight):
    spec = SimulationSpec.for_horizon(params, years, seed=seed)
    bm, bp, ergodic = [], [], 0
    for start in range(0, n_paths, 50):
        size = min(50, n_paths - start)
        for x in simulate_paths(spec, size, first_index=start):
            est = fit_arrays(x, [params.r], spec.dt, weight)
            b1, b2 = float(est["b_minus"][0]), float(est["b_plus"][0])
            bm.append(b1)
            bp.append(b2)
            ergodic += classify_regime(b1, b2).tag == "E"
    bm, bp = np.array(bm), np.array(bp)
    return (math.sqrt(np.mean((bm - params.b_minus) ** 2)), math.sqrt(np.mean((bp - params.b_plus) ** 2)),
            bm.mean(), bp.mean(), ergodic / n_paths)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizons", type=float, nargs="+", default=[25.0, 50.0, 100.0])
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--sigma", type=float, default=0.3)
    ap.add_argument("--b", type=float, default=0.5, help="drift size: +b below, -b above")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--halved-local-time", action="store_true")
    args = ap.parse_args()

    params = GobmParams(args.sigma, args.sigma, args.b, -args.b)
    weight = 0.5 if args.halved_local_time else 1.0
    print(f"{'T':>6} {'rmse b-':>8} {'rmse b+':>8} {'mean b-':>8} {'mean b+':>8} {'ergodic':>8}")
    prev = None
    for T in args.horizons:
        rm, rp, mm, mp, e = drift_rmse(params, T, args.paths, args.seed, weight)
        ratio = "" if prev is None else f"  ratio {prev[0] / rm:.3f} {prev[1] / rp:.3f}"
        print(f"{T:6.0f} {rm:8.4f} {rp:8.4f} {mm:8.4f} {mp:8.4f} {e:8.1%}{ratio}")
        prev = (rm, rp)


if __name__ == "__main__":
    main()
