"""Sampling meta-algorithms: CLARA / FastCLARA and CLARANS / FastCLARANS.

Each accepts either a :class:`~fastpam.core.DissimilarityMatrix` or a
matrix-free :class:`~fastpam.dissimilarity.VectorDistances` source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DissimilarityMatrix, MedoidState, cache_td, check_k, compute_td
from .dissimilarity import VectorDistances
from .initializers import InitConfig, initialize
from .rng import make_rng, spawn
from .swap import RunStats, SwapConfig, refine


def _counters(source):
    return source.lookups if isinstance(source, DissimilarityMatrix) else 0, getattr(
        source, "distance_evals", 0
    )


def _charge(stats, source, before):
    lookups, evals = _counters(source)
    stats.lookups += lookups - before[0]
    stats.distance_evals += evals - before[1]


def full_td(source, medoids):
    """TD of ``medoids`` over every object of ``source``, recomputed from scratch."""
    if isinstance(source, DissimilarityMatrix):
        return compute_td(source, medoids)
    dmin = source.rows(medoids).min(axis=0)
    total = 0.0
    for v in dmin.tolist():
        total += v
    return total


def nearest_slots(source, medoids):
    """Slot of the nearest medoid for every object (lowest slot on ties)."""
    medoids = np.asarray(medoids, dtype=np.intp)
    labels = np.argmin(source.rows(medoids), axis=0)
    labels[medoids] = np.arange(len(medoids))
    return labels


# --------------------------------------------------------------------- CLARA


@dataclass
class ClaraConfig:
    """CLARA settings; ``sample_size=None`` means ``scale * (40 + 2k)``."""

    sample_size: int | None = None
    restarts: int = 5
    engine: SwapConfig = field(default_factory=lambda: SwapConfig(engine="pam"))
    init: InitConfig = field(default_factory=lambda: InitConfig(method="build"))
    seed: int = 0
    scale: int = 1
    keep_best: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    @classmethod
    def x2(cls, **kwargs):
        """Doubled sample size (80 + 4k) and doubled restarts (10)."""
        kwargs.setdefault("scale", 2)
        kwargs.setdefault("restarts", 10)
        return cls(**kwargs)

    @classmethod
    def fast(cls, x2=True, tau=0.0, **kwargs):
        """FastCLARA: LAB initialization and FastPAM2 refinement."""
        kwargs.setdefault("engine", SwapConfig(engine="fastpam2", tau=tau))
        kwargs.setdefault("init", InitConfig(method="lab"))
        return cls.x2(**kwargs) if x2 else cls(**kwargs)

    def size_for(self, k):
        size = self.sample_size if self.sample_size is not None else self.scale * (40 + 2 * k)
        if size <= k:
            raise ValueError(f"sample size {size} must exceed k={k}")
        return size


def _as_matrix(source):
    if isinstance(source, DissimilarityMatrix):
        return source
    return source.submatrix(np.arange(source.n))


def clara(source, k, config=None):
    """Run the configured PAM variant on subsamples; keep the best full-data TD.

    After the first restart each subsample contains the incumbent medoids
    (``keep_best``). Returns ``(MedoidState, RunStats)``; the state's TD is
    recomputed over all objects and ``stats.restart_tds`` lists every
    restart's full-data TD.
    """
    config = config or ClaraConfig()
    n = source.n
    check_k(n, k)
    size = config.size_for(k)
    before = _counters(source)
    stats = RunStats()
    if size >= n:
        matrix = _as_matrix(source)
        init = InitConfig(config.init.method, config.seed, config.init.lab_sample_size)
        start = initialize(matrix, k, init)
        state, _, run = refine(matrix, start, config.engine)
        stats.add_work(run)
        stats.initial_td = start.td
        stats.final_td = state.td
        stats.restart_tds.append(state.td)
        stats.notice = f"sample size {size} >= n={n}: ran on the full data"
        if matrix is not source:
            stats.lookups += matrix.lookups - run.lookups
        _charge(stats, source, before)
        return state, stats

    best = None
    for rng in spawn(config.seed, config.restarts):
        if best is not None and config.keep_best:
            pool = np.setdiff1d(np.arange(n), best.medoids)
            extra = rng.choice(pool, size=size - k, replace=False)
            sample = np.sort(np.concatenate([best.medoids, extra]))
        else:
            sample = np.sort(rng.choice(n, size=size, replace=False))
        sub = source.submatrix(sample)
        init = InitConfig(config.init.method, int(rng.integers(2**63)), config.init.lab_sample_size)
        start = initialize(sub, k, init)
        state, _, run = refine(sub, start, config.engine)
        stats.add_work(run)
        # reads on the subsample matrix outside the refinement (initialization)
        stats.lookups += sub.lookups - run.lookups
        medoids = sample[state.medoids]
        td = full_td(source, medoids)
        stats.restart_tds.append(td)
        if best is None or td < best.td:
            best = MedoidState(medoids, td)
            # full-data TD of this restart's starting medoids
            stats.initial_td = full_td(source, sample[start.medoids])
    stats.final_td = best.td
    _charge(stats, source, before)
    return best, stats


def fastclara(source, k, config=None):
    return clara(source, k, config or ClaraConfig.fast())


# ------------------------------------------------------------------- CLARANS


@dataclass
class ClaransConfig:
    """CLARANS settings.

    The per-descent budget of consecutive failed draws is ``attempts`` or, if
    unset, ``max(ceil(rate * k * (n - k)), min_attempts)``. In ``fast_mode``
    every draw examines all k slots, so the budget is divided by k.
    """

    attempts: int | None = None
    rate: float = 0.0125
    min_attempts: int = 250
    numlocal: int = 2
    fast_mode: bool = False
    seed: int = 0
    check_steps: bool = False

    def __post_init__(self):
        if self.attempts is not None and self.attempts < 1:
            raise ValueError("attempts must be >= 1")
        if self.numlocal < 1:
            raise ValueError("numlocal must be >= 1")

    def edge_budget(self, n, k):
        if self.attempts is not None:
            return self.attempts
        return max(math.ceil(self.rate * k * (n - k)), self.min_attempts, 1)

    def budget(self, n, k):
        p = self.edge_budget(n, k)
        return max(1, math.ceil(p / k)) if self.fast_mode else p


class _Descent:
    """Greedy random descent state with a cache fed only by fresh distances."""

    def __init__(self, source, medoids, stats):
        self.source = source
        self.stats = stats
        self.n = source.n
        self.medoids = np.array(medoids, dtype=np.intp)
        self.k = len(self.medoids)
        self.is_medoid = np.zeros(self.n, dtype=bool)
        self.is_medoid[self.medoids] = True
        self.nonmedoids = np.flatnonzero(~self.is_medoid)
        self.nearest = np.empty(self.n, dtype=np.intp)
        self.second = np.empty(self.n, dtype=np.intp)
        self.dnear = np.empty(self.n)
        self.dsecond = np.empty(self.n)
        self._rescan(np.arange(self.n))
        self.td = cache_td(self)

    def _rescan(self, objs):
        if len(objs) == 0:
            return
        dist = np.asarray(self.source.cross(objs, self.medoids), dtype=np.float64)
        own = np.full(len(objs), -1)
        slot_of = {int(m): s for s, m in enumerate(self.medoids)}
        for r, o in enumerate(objs.tolist()):
            s = slot_of.get(o, -1)
            if s >= 0:
                own[r] = s
                dist[r, s] = np.inf
        order = np.argsort(dist, axis=1, kind="stable")
        rows = np.arange(len(objs))
        first = order[:, 0]
        d1 = dist[rows, first]
        if self.k > 1:
            nxt = order[:, 1]
            d2 = dist[rows, nxt]
        else:
            nxt = np.full(len(objs), -1)
            d2 = np.full(len(objs), np.inf)
        is_own = own >= 0
        self.nearest[objs] = np.where(is_own, own, first)
        self.dnear[objs] = np.where(is_own, 0.0, d1)
        self.second[objs] = np.where(is_own, first, nxt)
        self.dsecond[objs] = np.where(is_own, d1, d2)
        if self.k == 1:
            self.second[objs[is_own]] = -1
            self.dsecond[objs[is_own]] = np.inf

    def draw_candidate(self, rng):
        return int(self.nonmedoids[rng.integers(len(self.nonmedoids))])

    def delta_single(self, slot, j, doj):
        """Change-function sum for swapping ``j`` into ``slot``."""
        mask = ~self.is_medoid
        mask[self.medoids[slot]] = True
        mask[j] = False
        own = self.nearest == slot
        terms = np.where(
            own,
            np.minimum(doj, self.dsecond) - self.dnear,
            np.minimum(doj - self.dnear, 0.0),
        )
        self.stats.inner_updates += int(mask.sum()) + 1
        return float(-self.dnear[j] + terms[mask].sum())

    def delta_all(self, j, doj):
        """Loss change of swapping ``j`` into each of the k slots."""
        mask = np.ones(self.n, dtype=bool)
        mask[j] = False
        near = self.nearest[mask]
        dn = self.dnear[mask]
        dj = doj[mask]
        arr = np.full(self.k, -self.dnear[j])
        arr += np.bincount(near, weights=np.minimum(dj, self.dsecond[mask]) - dn, minlength=self.k)
        closer = dj < dn
        gain = dj[closer] - dn[closer]
        arr += gain.sum() - np.bincount(near[closer], weights=gain, minlength=self.k)
        self.stats.inner_updates += self.k + len(dn) + int(closer.sum()) * (self.k - 1)
        return arr

    def swap(self, slot, j, doj, delta):
        old = int(self.medoids[slot])
        self.medoids[slot] = j
        self.is_medoid[old] = False
        self.is_medoid[j] = True
        self.nonmedoids[np.searchsorted(self.nonmedoids, j)] = old
        self.nonmedoids.sort()
        rescan = (self.nearest == slot) | (self.second == slot)
        rescan[j] = True
        keep = ~rescan
        # the draw already computed d(., j); compare it against the kept cache
        closer = keep & ~self.is_medoid & (
            (doj < self.dnear) | ((doj == self.dnear) & (slot < self.nearest))
        )
        self.second[closer] = self.nearest[closer]
        self.dsecond[closer] = self.dnear[closer]
        self.nearest[closer] = slot
        self.dnear[closer] = doj[closer]
        rest = keep & ~closer & (
            (doj < self.dsecond) | ((doj == self.dsecond) & (slot < self.second))
        )
        self.second[rest] = slot
        self.dsecond[rest] = doj[rest]
        self._rescan(np.flatnonzero(rescan))
        self.td += delta
        self.stats.swaps_executed += 1


def _clarans(source, k, config):
    n = source.n
    check_k(n, k)
    budget = config.budget(n, k)
    before = _counters(source)
    stats = RunStats()
    best = None
    for rng in spawn(config.seed, config.numlocal):
        medoids = rng.choice(n, size=k, replace=False)
        run = _Descent(source, medoids, stats)
        start_td = run.td
        exact = start_td
        failures = 0
        while failures < budget:
            stats.iterations += 1
            j = run.draw_candidate(rng)
            if config.fast_mode:
                doj = source.row(j)
                arr = run.delta_all(j, doj)
                slot = int(np.argmin(arr))
                delta = float(arr[slot])
                stats.candidate_evaluations += k
                stats.edges_considered += k
            else:
                slot = int(rng.integers(k))
                doj = source.row(j)
                delta = run.delta_single(slot, j, doj)
                stats.candidate_evaluations += 1
                stats.edges_considered += 1
            if delta < 0:
                if config.check_steps:
                    old_td = full_td(source, run.medoids)
                run.swap(slot, j, doj, delta)
                if config.check_steps:
                    new_td = full_td(source, run.medoids)
                    if not new_td < old_td:
                        raise AssertionError(
                            f"accepted swap did not decrease TD ({old_td} -> {new_td})"
                        )
                # same guard as the SWAP engines: no cycling on rounding noise
                td = cache_td(run)
                if not td < exact:
                    stats.notice = "stopped: swap did not lower the recomputed TD"
                    break
                exact = td
                failures = 0
            else:
                failures += 1
        td = cache_td(run)
        stats.restart_tds.append(td)
        if best is None or td < best.td:
            best = MedoidState(run.medoids.copy(), td)
            stats.initial_td = start_td
    stats.final_td = best.td
    _charge(stats, source, before)
    return best, stats


def clarans(source, k, config=None):
    """Randomized first-improvement descent over single swaps.

    Each draw pairs a random medoid slot with a random non-medoid; a descent
    ends after the attempt budget of consecutive non-improving draws. The
    best of ``numlocal`` descents is returned.
    """
    config = config or ClaransConfig()
    if config.fast_mode:
        config = ClaransConfig(**{**config.__dict__, "fast_mode": False})
    return _clarans(source, k, config)


def fastclarans(source, k, config=None):
    """CLARANS drawing only the non-medoid and scoring it against all k slots.

    The best improving slot is taken; the attempt budget is divided by k so
    the number of examined swaps matches CLARANS.
    """
    config = config or ClaransConfig()
    if not config.fast_mode:
        config = ClaransConfig(**{**config.__dict__, "fast_mode": True})
    return _clarans(source, k, config)
