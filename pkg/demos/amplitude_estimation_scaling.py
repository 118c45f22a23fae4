"""
Amplitude estimation versus plain sampling
===========================================

Simulates maximum-likelihood amplitude estimation on known probabilities,
checks the advertised failure rate, and compares how the oracle bill grows
as the accuracy target shrinks.
"""

import math

import numpy as np

from qnumdiff import (
    AmplitudeProblem,
    classical_mc_estimate,
    depth_schedule,
    grover_call_count,
    mlae_estimate_batch,
    shots_for_delta,
    spawn_generators,
)

# Accuracy contract: 200 trials per cell, failure rate at most 3 percent
# at the default 99 percent confidence.
print("failure counts over 200 trials (target: at most 6):")
for p in (0.1, 0.5, 0.9):
    for eps in (1e-2, 1e-3):
        estimates, _ = mlae_estimate_batch(AmplitudeProblem(p), eps, 0.01,
                                           seed=[7, int(p * 10)], trials=200)
        fails = int(np.sum(np.abs(estimates - p) > eps))
        print(f"  p = {p}, eps = {eps}: {fails}")

# Query scaling: the depth ladder doubles, so calls grow like 1/eps;
# plain sampling needs 1/eps^2.
print("\noracle calls by accuracy target:")
shots = shots_for_delta(0.01)
print(f"{'eps':>10} {'mlae':>12} {'classical':>14}")
for k in range(5, 13):
    eps = 2.0**-k
    quantum = grover_call_count(depth_schedule(eps), shots)
    classical = math.ceil(math.log(2 / 0.01) / (2 * eps * eps))
    print(f"{eps:>10.2e} {quantum:>12} {classical:>14}")

# One concrete classical run for comparison.
rng = spawn_generators(123, 1)[0]
res = classical_mc_estimate(AmplitudeProblem(0.3), 1e-2, 0.01, rng)
print(f"\nclassical at eps = 1e-2: estimate {res.estimate:.4f} "
      f"from {res.shots} samples")
