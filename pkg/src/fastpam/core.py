"""Shared data model: dissimilarity storage, medoid state and assignment cache."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


class ParseError(ValueError):
    """Malformed input text; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(ValueError):
    """Non-finite or otherwise unusable numeric input; ``row`` is 0-based."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


def _offsets(n):
    idx = np.arange(n, dtype=np.int64)
    return idx * (idx - 1) // 2


class DissimilarityMatrix:
    """Symmetric dissimilarities over ``n`` objects in lower-triangular storage.

    ``values[i*(i-1)//2 + j]`` holds ``d(i, j)`` for ``i > j``; the diagonal is
    implicitly zero. The values are read-only after construction.

    ``eval_counter`` is the number of primitive dissimilarity evaluations spent
    building the matrix. ``lookups`` is a separate, mutable count of matrix
    reads performed by the algorithms run against it.
    """

    def __init__(self, n, values, eval_counter=0):
        n = int(n)
        if n < 1:
            raise ValueError("n must be positive")
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape != (n * (n - 1) // 2,):
            raise ValueError(
                f"expected {n * (n - 1) // 2} lower-triangular values for n={n}, "
                f"got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("dissimilarities must be finite")
        if np.any(values < 0):
            raise DataError("dissimilarities must be nonnegative")
        values.flags.writeable = False
        self.n = n
        self.values = values
        self.eval_counter = int(eval_counter)
        self.lookups = 0
        self._off = _offsets(n)

    @classmethod
    def from_square(cls, square, eval_counter=0):
        square = np.asarray(square, dtype=np.float64)
        n = square.shape[0]
        if square.shape != (n, n):
            raise ValueError("square matrix required")
        if not np.array_equal(square, square.T):
            raise DataError("matrix is not symmetric")
        if np.any(np.diag(square) != 0):
            raise DataError("diagonal must be zero")
        rows, cols = np.tril_indices(n, -1)
        return cls(n, square[rows, cols], eval_counter=eval_counter)

    def __repr__(self):
        return f"DissimilarityMatrix(n={self.n})"

    def __len__(self):
        return self.n

    def _check(self, i):
        if not -self.n <= i < self.n:
            raise IndexError(f"object index {i} out of range for n={self.n}")
        return i % self.n

    def __getitem__(self, ij):
        i, j = (self._check(int(x)) for x in ij)
        self.lookups += 1
        if i == j:
            return 0.0
        if i < j:
            i, j = j, i
        return float(self.values[self._off[i] + j])

    def _row_index(self, j):
        idx = np.empty(self.n, dtype=np.int64)
        idx[:j] = self._off[j] + np.arange(j)
        idx[j + 1 :] = self._off[j + 1 :] + j
        return idx

    def row(self, j):
        """All dissimilarities ``d(., j)`` as a new array."""
        j = self._check(int(j))
        idx = self._row_index(j)
        out = np.empty(self.n)
        mask = np.ones(self.n, dtype=bool)
        mask[j] = False
        out[mask] = self.values[idx[mask]]
        out[j] = 0.0
        self.lookups += self.n - 1
        return out

    def rows(self, indices):
        return np.stack([self.row(j) for j in indices]) if len(indices) else np.empty((0, self.n))

    def block(self, rows, cols):
        """``len(rows) x len(cols)`` array of dissimilarities."""
        rows = np.asarray(rows, dtype=np.int64)[:, None]
        cols = np.asarray(cols, dtype=np.int64)[None, :]
        hi, lo = np.maximum(rows, cols), np.minimum(rows, cols)
        same = hi == lo
        out = self.values[np.where(same, 0, self._off[hi] + lo)]
        out[same] = 0.0
        self.lookups += int(out.size - same.sum())
        return out

    cross = block

    def submatrix(self, indices):
        """Matrix restricted to ``indices`` (in the given order)."""
        indices = np.asarray(indices, dtype=np.int64)
        m = len(indices)
        rows, cols = np.tril_indices(m, -1)
        a, b = indices[rows], indices[cols]
        hi, lo = np.maximum(a, b), np.minimum(a, b)
        if np.any(hi == lo):
            raise ValueError("submatrix indices must be distinct")
        self.lookups += len(rows)
        return DissimilarityMatrix(m, self.values[self._off[hi] + lo])

    def to_square(self):
        out = np.zeros((self.n, self.n))
        rows, cols = np.tril_indices(self.n, -1)
        out[rows, cols] = self.values
        out[cols, rows] = self.values
        return out


@dataclass
class MedoidState:
    """Current medoids (slot ``i`` holds object ``medoids[i]``) and their loss."""

    medoids: np.ndarray
    td: float

    def __post_init__(self):
        self.medoids = np.array(self.medoids, dtype=np.intp)

    @property
    def k(self):
        return len(self.medoids)

    def copy(self):
        return MedoidState(self.medoids.copy(), self.td)


@dataclass
class AssignmentCache:
    """Per-object nearest and second-nearest medoid slots and distances.

    Ties go to the lower slot. A medoid object is always assigned to its own
    slot at distance zero. With a single medoid, ``second`` is -1 and
    ``dsecond`` is +inf.
    """

    nearest: np.ndarray
    second: np.ndarray
    dnear: np.ndarray
    dsecond: np.ndarray

    @classmethod
    def empty(cls, n):
        return cls(
            np.full(n, -1, dtype=np.intp),
            np.full(n, -1, dtype=np.intp),
            np.zeros(n),
            np.full(n, np.inf),
        )

    def copy(self):
        return AssignmentCache(
            self.nearest.copy(), self.second.copy(), self.dnear.copy(), self.dsecond.copy()
        )

    def equals(self, other):
        return (
            np.array_equal(self.nearest, other.nearest)
            and np.array_equal(self.second, other.second)
            and np.array_equal(self.dnear, other.dnear)
            and np.array_equal(self.dsecond, other.dsecond)
        )


@dataclass(frozen=True)
class SwapCandidate:
    """Replace the medoid in ``slot`` by object ``candidate``; ``delta_td`` < 0 improves."""

    slot: int
    candidate: int
    delta_td: float


@dataclass
class SwapRecord:
    """One executed swap, as written to trace CSV files."""

    iteration: int
    slot: int
    out_index: int
    in_index: int
    delta_td: float

    def key(self):
        return (self.iteration, self.slot, self.out_index, self.in_index)


def validate_medoids(n, medoids, allow_all=False):
    medoids = np.asarray(medoids)
    if medoids.ndim != 1 or len(medoids) == 0:
        raise ValueError("medoid list must be nonempty")
    medoids = medoids.astype(np.intp)
    if np.any(medoids < 0) or np.any(medoids >= n):
        raise IndexError(f"medoid index out of range for n={n}")
    if len(np.unique(medoids)) != len(medoids):
        raise ValueError("medoids must be distinct")
    if not allow_all and len(medoids) >= n:
        raise ValueError(f"need 1 <= k < n, got k={len(medoids)}, n={n}")
    return np.ascontiguousarray(medoids)


def check_k(n, k):
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")


def compute_td(matrix, medoids):
    """Total deviation: sum over objects of the distance to the nearest medoid."""
    medoids = validate_medoids(matrix.n, medoids, allow_all=True)
    total, lookups = kernels.backend.td(matrix.values, matrix.n, medoids)
    matrix.lookups += lookups
    return total


def medoid_mask(n, medoids):
    mask = np.zeros(n, dtype=np.uint8)
    mask[medoids] = 1
    return mask


def rebuild_cache(matrix, medoids):
    """Full nearest / second-nearest scan for every object."""
    if isinstance(medoids, MedoidState):
        medoids = medoids.medoids
    medoids = validate_medoids(matrix.n, medoids, allow_all=True)
    cache = AssignmentCache.empty(matrix.n)
    matrix.lookups += kernels.backend.assign(
        matrix.values, matrix.n, medoids, cache.nearest, cache.second, cache.dnear, cache.dsecond
    )
    return cache


def cache_td(cache):
    """Loss from a valid cache, summed in ascending object order."""
    total = 0.0
    for v in cache.dnear.tolist():
        total += v
    return total


def swap_delta(matrix, state, cache, slot, candidate, is_medoid=None):
    """Exact change in TD for replacing ``state.medoids[slot]`` by ``candidate``."""
    if is_medoid is None:
        is_medoid = medoid_mask(matrix.n, state.medoids)
    delta, _, lookups = kernels.backend.swap_delta(
        matrix.values, matrix.n, state.medoids, is_medoid,
        cache.nearest, cache.dnear, cache.dsecond, slot, candidate,
    )
    matrix.lookups += lookups
    return delta


def change(matrix, cache, o, slot, j):
    """Contribution of object ``o`` to the loss change of swapping ``j`` into ``slot``."""
    doj = matrix[o, j]
    dn = cache.dnear[o]
    if cache.nearest[o] == slot:
        return min(doj, cache.dsecond[o]) - dn
    return min(doj - dn, 0.0)


def apply_swap(state, cache, swap, matrix, is_medoid=None):
    """Execute ``swap`` in place: replace the slot, add the delta, refresh the cache.

    Only objects whose nearest or second-nearest slot was the replaced one are
    rescanned; all others are compared against the new medoid only.
    """
    slot, cand = int(swap.slot), int(swap.candidate)
    if not 0 <= slot < state.k:
        raise IndexError(f"slot {slot} out of range for k={state.k}")
    if not 0 <= cand < matrix.n:
        raise IndexError(f"object index {cand} out of range for n={matrix.n}")
    if is_medoid is None:
        if cand in state.medoids:
            raise ValueError(f"object {cand} is already a medoid")
        is_medoid = medoid_mask(matrix.n, state.medoids)
    elif is_medoid[cand]:
        raise ValueError(f"object {cand} is already a medoid")
    is_medoid[state.medoids[slot]] = 0
    is_medoid[cand] = 1
    state.medoids[slot] = cand
    state.td += swap.delta_td
    matrix.lookups += kernels.backend.update_cache(
        matrix.values, matrix.n, state.medoids, is_medoid, slot,
        cache.nearest, cache.second, cache.dnear, cache.dsecond,
    )
    return state, cache
