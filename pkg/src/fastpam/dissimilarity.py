"""Dissimilarity construction from vectors and the triangular text format."""

from __future__ import annotations

import enum
import io

import numpy as np

from .core import DataError, DissimilarityMatrix, ParseError


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SQEUCLIDEAN = "sqeuclidean"
    MANHATTAN = "manhattan"
    PRECOMPUTED = "precomputed"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"squared-euclidean": "sqeuclidean", "l1": "manhattan", "l2": "euclidean"}
        value = aliases.get(str(value).lower(), str(value).lower())
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown metric {value!r}") from None


def pairwise_to(data, x, metric):
    """Distances from every row of ``data`` to the vector ``x``."""
    # column-by-column accumulation: the value of d(i, j) must not depend on
    # the shape of the block it is computed in
    acc = np.zeros(data.shape[0])
    for c in range(data.shape[1]):
        diff = data[:, c] - x[c]
        if metric is Metric.MANHATTAN:
            acc += np.abs(diff)
        else:
            acc += diff * diff
    if metric is Metric.EUCLIDEAN:
        return np.sqrt(acc)
    return acc


def check_data(data):
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2 or data.shape[1] < 1:
        raise DataError("data must be an n x d array with d >= 1")
    bad = ~np.isfinite(data).all(axis=1)
    if bad.any():
        raise DataError("non-finite value", row=int(np.argmax(bad)))
    return np.ascontiguousarray(data)


def build_matrix(data, metric="euclidean"):
    """Dissimilarity matrix of the rows of ``data`` under ``metric``."""
    metric = Metric.parse(metric)
    if metric is Metric.PRECOMPUTED:
        raise ValueError("precomputed metric takes a matrix, not vector data")
    data = check_data(data)
    n = data.shape[0]
    if n < 2:
        raise DataError("need at least two objects")
    values = np.empty(n * (n - 1) // 2)
    pos = 0
    for i in range(1, n):
        values[pos : pos + i] = pairwise_to(data[:i], data[i], metric)
        pos += i
    return DissimilarityMatrix(n, values, eval_counter=n * (n - 1) // 2)


class VectorDistances:
    """Matrix-free distance source: every request is computed from the vectors.

    Nothing is cached, so ``distance_evals`` counts every evaluation performed.
    Exposes the same ``row``/``rows``/``submatrix`` access as the matrix.
    """

    def __init__(self, data, metric="euclidean"):
        self.metric = Metric.parse(metric)
        if self.metric is Metric.PRECOMPUTED:
            raise ValueError("matrix-free mode needs a vector metric")
        self.data = check_data(data)
        self.n = self.data.shape[0]
        self.distance_evals = 0

    def __repr__(self):
        return f"VectorDistances(n={self.n}, metric={self.metric.value})"

    def __getitem__(self, ij):
        i, j = ij
        self.distance_evals += 1
        return float(pairwise_to(self.data[[i]], self.data[j], self.metric)[0])

    def row(self, j):
        out = pairwise_to(self.data, self.data[j], self.metric)
        out[j] = 0.0
        self.distance_evals += self.n
        return out

    def rows(self, indices):
        return np.stack([self.row(j) for j in indices]) if len(indices) else np.empty((0, self.n))

    def cross(self, objects, targets):
        """``len(objects) x len(targets)`` distance block."""
        objects = np.asarray(objects)
        out = np.empty((len(objects), len(targets)))
        for c, t in enumerate(targets):
            out[:, c] = pairwise_to(self.data[objects], self.data[t], self.metric)
        self.distance_evals += out.size
        return out

    def submatrix(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        sub = build_matrix(self.data[indices], self.metric)
        self.distance_evals += sub.eval_counter
        return sub


def save_matrix(matrix, stream):
    """Write ``matrix`` in the triangular text format (full float precision)."""
    stream.write(f"{matrix.n}\n")
    off = 0
    for i in range(1, matrix.n):
        stream.write(" ".join(repr(float(v)) for v in matrix.values[off : off + i]))
        stream.write("\n")
        off += i


def dumps_matrix(matrix):
    buf = io.StringIO()
    save_matrix(matrix, buf)
    return buf.getvalue()


def load_matrix(stream):
    """Read the triangular text format.

    Line 1 holds ``n``; line ``r + 1`` (for ``r = 1 .. n-1``) holds the ``r``
    entries ``d(r, 0) .. d(r, r-1)``. Blank lines and ``#`` comments are
    skipped. Loaded matrices report ``eval_counter == 0``.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    lines = ((no, raw.split("#", 1)[0].strip()) for no, raw in enumerate(stream, start=1))
    lines = ((no, text) for no, text in lines if text)
    try:
        no, text = next(lines)
    except StopIteration:
        raise ParseError("empty matrix file") from None
    try:
        n = int(text)
    except ValueError:
        raise ParseError(f"expected object count, got {text!r}", no) from None
    if n < 1:
        raise ParseError(f"object count must be positive, got {n}", no)
    values = np.empty(n * (n - 1) // 2)
    pos = 0
    for r in range(1, n):
        try:
            no, text = next(lines)
        except StopIteration:
            raise ParseError(f"expected {n - 1} rows, file ended after {r - 1}") from None
        tokens = text.split()
        if len(tokens) != r:
            raise ParseError(f"row {r} needs {r} entries, got {len(tokens)}", no)
        try:
            row = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise ParseError(f"non-numeric entry ({exc})", no) from None
        for v in row:
            if not np.isfinite(v):
                raise ParseError(f"non-finite entry {v}", no)
            if v < 0:
                raise ParseError(f"negative dissimilarity {v}", no)
        values[pos : pos + r] = row
        pos += r
    extra = next(lines, None)
    if extra is not None:
        raise ParseError("unexpected data after the last row", extra[0])
    return DissimilarityMatrix(n, values, eval_counter=0)
