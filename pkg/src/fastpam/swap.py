"""SWAP refinement engines.

``pam``, ``reynolds`` and ``fastpam1`` are exact steepest descent: each
iteration scans all k(n-k) swaps and executes the single best one, ties going
to the lowest candidate object and then the lowest slot. They differ only in
loop order and therefore in cost, and produce identical swap traces.
``fastpam2`` keeps the best candidate per slot and may execute up to k swaps
per iteration.

The worst-case number of iterations is not polynomially bounded; use
``max_iter`` when a hard cap is needed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import (
    SwapCandidate,
    SwapRecord,
    apply_swap,
    cache_td,
    medoid_mask,
    rebuild_cache,
    validate_medoids,
)

ENGINES = ("pam", "reynolds", "fastpam1", "fastpam2")


@dataclass
class SwapConfig:
    engine: str = "fastpam2"
    tau: float = 0.0
    max_iter: int = 0
    trace: bool = False

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown swap engine {self.engine!r}")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")


@dataclass
class RunStats:
    """Counters for one refinement (or one meta-algorithm run).

    ``candidate_evaluations`` counts scored (slot, candidate) pairs.
    ``inner_updates`` counts accumulations into a loss-change value: change
    function terms for PAM and Reynolds, slot-array updates for FastPAM.
    ``lookups`` counts dissimilarity-matrix reads and ``distance_evals``
    counts distances computed from vectors in matrix-free mode.
    """

    iterations: int = 0
    swaps_executed: int = 0
    candidate_evaluations: int = 0
    inner_updates: int = 0
    lookups: int = 0
    distance_evals: int = 0
    edges_considered: int = 0
    initial_td: float = math.nan
    final_td: float = math.nan
    truncated: bool = False
    trace: list = field(default_factory=list)
    restart_tds: list = field(default_factory=list)
    notice: str | None = None

    def add_work(self, other):
        """Accumulate another run's work counters into this one."""
        self.iterations += other.iterations
        self.swaps_executed += other.swaps_executed
        self.candidate_evaluations += other.candidate_evaluations
        self.inner_updates += other.inner_updates
        self.lookups += other.lookups
        self.distance_evals += other.distance_evals
        self.edges_considered += other.edges_considered
        self.truncated = self.truncated or other.truncated

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "swaps_executed": self.swaps_executed,
            "candidate_evaluations": self.candidate_evaluations,
            "inner_updates": self.inner_updates,
            "lookups": self.lookups,
            "distance_evals": self.distance_evals,
            "edges_considered": self.edges_considered,
            "initial_td": self.initial_td,
            "final_td": self.final_td,
            "truncated": self.truncated,
            "notice": self.notice,
        }


def write_trace(trace, stream):
    """Swap trace as CSV: iteration, slot, out-index, in-index, delta_td."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["iteration", "slot", "out_index", "in_index", "delta_td"])
    for r in trace:
        writer.writerow([r.iteration, r.slot, r.out_index, r.in_index, repr(float(r.delta_td))])


def read_trace(stream):
    rows = list(csv.reader(stream))
    return [
        SwapRecord(int(a), int(b), int(c), int(d), float(e)) for a, b, c, d, e in rows[1:]
    ]


class _Run:
    """Working copy of state + cache shared by the engine loops."""

    def __init__(self, matrix, state, cache, config):
        self.matrix = matrix
        self.config = config or SwapConfig()
        self.state = state.copy()
        self.state.medoids = validate_medoids(matrix.n, self.state.medoids)
        self.cache = rebuild_cache(matrix, self.state.medoids) if cache is None else cache.copy()
        self.is_medoid = medoid_mask(matrix.n, self.state.medoids)
        self.stats = RunStats(initial_td=self.state.td)
        self._lookups0 = matrix.lookups
        self._exact_td = cache_td(self.cache)

    def progressed(self):
        """Whether the from-cache TD strictly dropped since the last check.

        Deltas near zero can round negative in both directions; requiring a
        strict decrease of the recomputed loss rules out swap cycles.
        """
        td = cache_td(self.cache)
        if td < self._exact_td:
            self._exact_td = td
            return True
        self.stats.notice = "stopped: swap did not lower the recomputed TD"
        return False

    @property
    def args(self):
        c = self.cache
        return (
            self.matrix.values, self.matrix.n, self.state.medoids, self.is_medoid,
            c.nearest, c.dnear, c.dsecond,
        )

    def capped(self):
        cap = self.config.max_iter
        if cap and self.stats.iterations >= cap:
            self.stats.truncated = True
            return True
        return False

    def execute(self, slot, cand, delta):
        slot, cand = int(slot), int(cand)
        if self.config.trace:
            self.stats.trace.append(
                SwapRecord(self.stats.iterations, slot, int(self.state.medoids[slot]), cand, delta)
            )
        apply_swap(self.state, self.cache, SwapCandidate(slot, cand, delta), self.matrix, self.is_medoid)
        self.stats.swaps_executed += 1

    def finish(self):
        self.stats.final_td = self.state.td
        self.stats.lookups = self.matrix.lookups - self._lookups0
        return self.state, self.cache, self.stats


def _steepest(matrix, state, cache, config, scan):
    run = _Run(matrix, state, cache, config)
    k, n = run.state.k, matrix.n
    while not run.capped():
        run.stats.iterations += 1
        best, slot, cand, inner, lookups = scan(*run.args)
        run.stats.candidate_evaluations += k * (n - k)
        run.stats.inner_updates += inner
        matrix.lookups += lookups
        if slot < 0 or best >= 0:
            break
        run.execute(slot, cand, best)
        if not run.progressed():
            break
    return run.finish()


def pam_swap(matrix, state, cache=None, config=None):
    """Original PAM SWAP: full change-function sum for every (slot, candidate)."""
    return _steepest(matrix, state, cache, config, kernels.backend.pam_scan)


def removal_losses(cache, k):
    """Per-slot loss of deleting each medoid: sum of d_s - d_n over its members."""
    if k < 2:
        raise ValueError("removal loss needs k >= 2")
    out = np.zeros(k)
    for o, slot in enumerate(cache.nearest.tolist()):
        out[slot] += cache.dsecond[o] - cache.dnear[o]
    return out


def reynolds_swap(matrix, state, cache=None, config=None):
    """PAM SWAP with the per-medoid removal loss computed once per sweep.

    The decomposed sums round differently from the change-function sum used
    by PAM, which matters only when two swaps tie in exact arithmetic. Every
    pair scoring within a rounding-error bound of the best is therefore
    rescored with the change-function sum, and the lowest (delta, candidate,
    slot) among those wins. The bound covers both summation orders, so the
    selected swap is the one PAM selects.
    """
    k, n = len(state.medoids), matrix.n
    if k < 2:
        raise ValueError("the Reynolds decomposition needs k >= 2")
    backend = kernels.backend
    deltas = np.empty((k, n))
    dmax = float(matrix.values.max()) if len(matrix.values) else 0.0
    # each loss change is a sum of at most 2n+1 terms of magnitude <= dmax
    margin = 4.0 * (2 * n + 2) ** 2 * np.finfo(float).eps * dmax

    def scan(*args):
        deltas.fill(np.inf)
        _, _, _, inner, lookups = backend.reynolds_scan(*args, deltas)
        low = deltas.min()
        if low > margin:
            return low, -1, -1, inner, lookups
        scored = []
        for i, j in np.argwhere(deltas <= low + margin).tolist():
            delta, extra, reads = backend.swap_delta(*args, i, j)
            inner += extra
            lookups += reads
            scored.append((delta, j, i))
        delta, j, i = min(scored)
        return delta, i, j, inner, lookups

    return _steepest(matrix, state, cache, config, scan)


def fastpam1_swap(matrix, state, cache=None, config=None):
    """FastPAM1: loss changes for all k slots per candidate in one pass."""
    return _steepest(matrix, state, cache, config, kernels.backend.fastpam1_scan)


def fastpam2_swap(matrix, state, cache=None, config=None):
    """FastPAM2: remember the best swap per slot, then execute them best-first.

    After each executed swap the remaining candidates are re-evaluated; a
    candidate is kept if its new delta is at most ``tau`` times the stored
    one (tau=1 strict, tau=0 greedy) and executed only while negative.
    """
    run = _Run(matrix, state, cache, config)
    tau = run.config.tau
    k, n = run.state.k, matrix.n
    best_delta = np.zeros(k)
    best_cand = np.full(k, -1, dtype=np.intp)
    backend = kernels.backend
    while not run.capped():
        run.stats.iterations += 1
        inner, lookups = backend.fastpam2_scan(*run.args, best_delta, best_cand)
        run.stats.candidate_evaluations += k * (n - k)
        run.stats.inner_updates += inner
        matrix.lookups += lookups
        if best_delta.min() >= 0:
            break
        while True:
            i = int(np.argmin(best_delta))
            if best_delta[i] >= 0:
                break
            run.execute(i, best_cand[i], float(best_delta[i]))
            best_delta[i] = 0.0
            for j in np.flatnonzero(best_delta < 0):
                cand = best_cand[j]
                if run.is_medoid[cand]:
                    best_delta[j] = 0.0
                    continue
                delta, inner, lookups = backend.swap_delta(*run.args, j, cand)
                run.stats.inner_updates += inner
                run.stats.candidate_evaluations += 1
                matrix.lookups += lookups
                best_delta[j] = delta if delta <= tau * best_delta[j] else 0.0
        if not run.progressed():
            break
    return run.finish()


SWAP_FUNCTIONS = {
    "pam": pam_swap,
    "reynolds": reynolds_swap,
    "fastpam1": fastpam1_swap,
    "fastpam2": fastpam2_swap,
}


def refine(matrix, state, config=None, cache=None):
    config = config or SwapConfig()
    return SWAP_FUNCTIONS[config.engine](matrix, state, cache, config)


def parkjun_refine(matrix, state, cache=None, max_iter=0, trace=False):
    """Alternate in-cluster medoid updates and nearest-medoid reassignment.

    Each cluster's new medoid is the member with the smallest distance sum to
    the other members (lowest index on ties). Stops, keeping the previous
    state, as soon as an update fails to decrease TD.
    """
    run = _Run(matrix, state, cache, SwapConfig(max_iter=max_iter, trace=trace))
    while not run.capped():
        run.stats.iterations += 1
        new = run.state.medoids.copy()
        for slot in range(run.state.k):
            members = np.flatnonzero(run.cache.nearest == slot)
            dist = matrix.block(members, members)
            run.stats.candidate_evaluations += len(members)
            run.stats.inner_updates += len(members) * len(members)
            new[slot] = members[np.argmin(dist.sum(axis=0))]
        changed = int(np.sum(new != run.state.medoids))
        if not changed:
            break
        cache = rebuild_cache(matrix, new)
        td = cache_td(cache)
        if not td < run.state.td:
            break
        if run.config.trace:
            for slot in np.flatnonzero(new != run.state.medoids):
                run.stats.trace.append(
                    SwapRecord(run.stats.iterations, int(slot), int(run.state.medoids[slot]),
                               int(new[slot]), math.nan)
                )
        run.state.medoids = new
        run.state.td = td
        run.cache = cache
        run.is_medoid = medoid_mask(matrix.n, new)
        run.stats.swaps_executed += changed
    return run.finish()


def swap_gap(matrix, medoids):
    """Smallest TD change over all k(n-k) single swaps, computed from scratch.

    Independent of the cache machinery: nearest and second-nearest distances
    are recomputed with numpy and every swap is scored by its post-swap TD.
    Returns ``(min_delta, slot, candidate)``; ``min_delta >= 0`` certifies a
    local optimum.
    """
    medoids = validate_medoids(matrix.n, medoids)
    n, k = matrix.n, len(medoids)
    dm = matrix.block(np.arange(n), medoids)
    td = dm.min(axis=1).sum()
    if k == 1:
        without = np.full((n, 1), np.inf)
    else:
        part = np.sort(dm, axis=1)[:, :2]
        near = np.argmin(dm, axis=1)
        without = np.where(near[:, None] == np.arange(k)[None, :], part[:, 1:2], part[:, 0:1])
    best = (math.inf, -1, -1)
    is_medoid = np.zeros(n, dtype=bool)
    is_medoid[medoids] = True
    for j in np.flatnonzero(~is_medoid):
        dj = matrix.row(j)
        after = np.minimum(without, dj[:, None]).sum(axis=0) - td
        i = int(np.argmin(after))
        if after[i] < best[0]:
            best = (float(after[i]), i, int(j))
    return best
