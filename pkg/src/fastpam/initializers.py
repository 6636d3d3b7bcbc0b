"""Initial medoid selection: BUILD, LAB, k-means++, uniform random, Park-Jun."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import MedoidState, check_k, compute_td
from .rng import make_rng

INIT_METHODS = ("build", "lab", "kmeanspp", "random", "parkjun")


@dataclass
class InitConfig:
    method: str = "build"
    seed: int = 0
    lab_sample_size: int | None = None

    def __post_init__(self):
        if self.method not in INIT_METHODS:
            raise ValueError(f"unknown init method {self.method!r}")


def _state(matrix, medoids):
    medoids = np.asarray(medoids, dtype=np.intp)
    return MedoidState(medoids, compute_td(matrix, medoids))


def build_init(matrix, k):
    """Greedy BUILD: the most central object first, then the largest TD reduction.

    O(n^2 k) time. Ties go to the lowest object index.
    """
    check_k(matrix.n, k)
    medoids = np.empty(k, dtype=np.intp)
    matrix.lookups += kernels.backend.build(matrix.values, matrix.n, k, medoids)
    return _state(matrix, medoids)


def lab_sample_size(n):
    return 10 + math.ceil(math.sqrt(n))


def lab_init(matrix, k, seed=0, sample_size=None):
    """Linear approximate BUILD.

    Each medoid is chosen like in BUILD, but among and with respect to a fresh
    uniform subsample of the remaining non-medoids, so the cost is O(n k)
    lookups instead of O(n^2 k).
    """
    n = matrix.n
    check_k(n, k)
    rng = make_rng(seed)
    s = sample_size if sample_size is not None else lab_sample_size(n)
    if s < 1:
        raise ValueError("LAB sample size must be positive")
    sample = np.sort(rng.choice(n, size=min(s, n), replace=False))
    dist = matrix.block(sample, sample)
    medoids = [int(sample[np.argmin(dist.sum(axis=0))])]
    is_medoid = np.zeros(n, dtype=bool)
    is_medoid[medoids[0]] = True
    for _ in range(1, k):
        pool = np.flatnonzero(~is_medoid)
        sample = np.sort(rng.choice(pool, size=min(s, len(pool)), replace=False))
        dmin = matrix.block(sample, medoids).min(axis=1)
        dist = matrix.block(sample, sample)
        gain = np.minimum(dist - dmin[:, None], 0.0).sum(axis=0)
        best = int(sample[np.argmin(gain)])
        medoids.append(best)
        is_medoid[best] = True
    return _state(matrix, medoids)


def kmeanspp_init(matrix, k, seed=0):
    """k-means++ style seeding on the dissimilarities.

    The first medoid is uniform; each next one is drawn with probability
    proportional to its distance to the nearest medoid chosen so far. If all
    remaining objects coincide with medoids, the draw falls back to uniform.
    """
    n = matrix.n
    check_k(n, k)
    rng = make_rng(seed)
    first = int(rng.integers(n))
    medoids = [first]
    dmin = matrix.row(first)
    for _ in range(1, k):
        weights = dmin.copy()
        weights[medoids] = 0.0
        total = weights.sum()
        if total > 0:
            cum = np.cumsum(weights)
            pick = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            pick = min(pick, n - 1)
            # rounding at the top end can land on a trailing zero weight
            while weights[pick] == 0:
                pick -= 1
        else:
            pool = np.setdiff1d(np.arange(n), medoids)
            pick = int(rng.choice(pool))
        medoids.append(pick)
        dmin = np.minimum(dmin, matrix.row(pick))
    return _state(matrix, medoids)


def random_medoids(n, k, seed=0):
    check_k(n, k)
    return make_rng(seed).choice(n, size=k, replace=False).astype(np.intp)


def random_init(matrix, k, seed=0):
    """``k`` distinct medoids drawn uniformly."""
    return _state(matrix, random_medoids(matrix.n, k, seed))


def parkjun_scores(matrix):
    """Centrality score ``v_j = sum_i d(i, j) / sum_l d(i, l)`` per object.

    Rows with a zero distance sum contribute nothing. Columns are summed with
    ``math.fsum`` so mirror-image objects get exactly equal scores.
    """
    square = matrix.to_square()
    matrix.lookups += matrix.n * (matrix.n - 1)
    rowsum = np.array([math.fsum(r) for r in square])
    scale = np.divide(1.0, rowsum, out=np.zeros_like(rowsum), where=rowsum > 0)
    normalized = square * scale[:, None]
    return np.array([math.fsum(col) for col in normalized.T])


def parkjun_init(matrix, k):
    """The ``k`` objects with the smallest Park-Jun score (lowest index on ties)."""
    check_k(matrix.n, k)
    order = np.argsort(parkjun_scores(matrix), kind="stable")
    return _state(matrix, order[:k])


def initialize(matrix, k, config=None):
    config = config or InitConfig()
    if config.method == "build":
        return build_init(matrix, k)
    if config.method == "lab":
        return lab_init(matrix, k, config.seed, config.lab_sample_size)
    if config.method == "kmeanspp":
        return kmeanspp_init(matrix, k, config.seed)
    if config.method == "random":
        return random_init(matrix, k, config.seed)
    return parkjun_init(matrix, k)
