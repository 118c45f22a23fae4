"""Discrete distributions standing in for the stochastic variable S.

The estimation pipeline consumes a finite grid of outcomes with
probabilities; a truncated standard normal on cell centers is the default.
Exact classical expectations over the grid serve as ground truth.
"""

import csv
import math

import numpy as np

PROB_SUM_TOL = 1e-12


class DiscreteDistribution:
    """Finite outcome grid with probabilities.

    points must be strictly increasing; probs nonnegative and summing to 1
    within 1e-12.  Instances are immutable (arrays are locked) and safe to
    share.
    """

    __slots__ = ("points", "probs")

    def __init__(self, points, probs):
        points = np.asarray(points, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if points.ndim != 1 or probs.ndim != 1 or points.size != probs.size:
            raise ValueError("points and probs must be 1-d arrays of equal length")
        if points.size == 0:
            raise ValueError("distribution needs at least one point")
        if np.any(np.diff(points) <= 0):
            raise ValueError("points must be strictly increasing")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        total = math.fsum(probs.tolist())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        points.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "probs", probs)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteDistribution is immutable")

    def __len__(self):
        return self.points.size


def discretize_standard_normal(levels, truncation=6.0):
    """Standard normal on 2^levels cell centers of [-L, L], renormalized.

    Grid points are s_i = -L + (i + 1/2) * (2L / 2^levels); probabilities
    are proportional to the density at the point.  Density-at-point
    renormalization (not bin integrals) is deliberate; the difference is
    part of the discretization budget tuned per experiment.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if truncation <= 0:
        raise ValueError("truncation must be positive")
    count = 1 << levels
    step = 2.0 * truncation / count
    idx = np.arange(count, dtype=float)
    points = -truncation + (idx + 0.5) * step
    logw = -0.5 * points**2
    w = np.exp(logw - logw.max())
    probs = w / math.fsum(w.tolist())
    return DiscreteDistribution(points, probs)


def discretize_uniform(levels, truncation=6.0):
    """Uniform distribution on the same 2^levels cell centers of [-L, L]."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if truncation <= 0:
        raise ValueError("truncation must be positive")
    count = 1 << levels
    step = 2.0 * truncation / count
    idx = np.arange(count, dtype=float)
    points = -truncation + (idx + 0.5) * step
    probs = np.full(count, 1.0 / count)
    return DiscreteDistribution(points, probs)


def distribution_from_csv(path):
    """Load (point, prob) rows from a CSV file."""
    pts, prs = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            pts.append(float(row[0]))
            prs.append(float(row[1]))
    return DiscreteDistribution(pts, prs)


def expectation(dist, f):
    """Compensated sum of p_i * f(s_i).

    f is called once per grid point and must return a finite value
    everywhere.
    """
    terms = []
    for s, p in zip(dist.points.tolist(), dist.probs.tolist()):
        v = f(s)
        if not math.isfinite(v):
            raise ValueError(f"integrand returned non-finite value {v!r} at s={s!r}")
        terms.append(p * v)
    return math.fsum(terms)
