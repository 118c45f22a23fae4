"""Empirical calibration of the MLAE shot budget.

Sweeps SHOTS_PER_DEPTH candidates over a grid of flag probabilities and
target accuracies, measuring the failure rate P(|estimate - p| > eps) at
delta = 0.01.  The smallest candidate whose worst cell stays below the
failure budget (with margin) is frozen into qae_sim.SHOTS_PER_DEPTH.
"""

import sys
import time

import numpy as np

sys.path.insert(0, "src")
import qnumdiff.qae_sim as qs  # noqa: E402

P_GRID = [0.1, 0.3, 0.5, 0.7, 0.9]
EPS_GRID = [1e-2, 1e-3]
TRIALS = 1000
DELTA = 0.01


def failure_rate(shots_per_depth, p, eps, seed):
    qs.SHOTS_PER_DEPTH = shots_per_depth
    prob = qs.AmplitudeProblem(p)
    est, _ = qs.mlae_estimate_batch(prob, eps, DELTA, seed, TRIALS)
    return float(np.mean(np.abs(est - p) > eps))


def main():
    for cand in (48, 64, 96, 128):
        worst = 0.0
        t0 = time.time()
        rows = []
        for eps in EPS_GRID:
            for i, p in enumerate(P_GRID):
                rate = failure_rate(cand, p, eps, seed=90000 + i)
                rows.append((p, eps, rate))
                worst = max(worst, rate)
        dt = time.time() - t0
        print(f"SHOTS_PER_DEPTH={cand}: worst={worst:.4f} ({dt:.1f}s)")
        for p, eps, rate in rows:
            print(f"    p={p} eps={eps:g} fail={rate:.4f}")
        if worst <= 0.005:
            print(f"--> freeze SHOTS_PER_DEPTH={cand}")
            break


if __name__ == "__main__":
    main()
