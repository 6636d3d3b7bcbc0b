"""Synthetic data and CSV ingestion."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .core import DataError, ParseError
from .rng import RNG_ID, make_rng


@dataclass
class MixtureSpec:
    """Balanced isotropic Gaussian mixture with centers uniform in ``[0, box]^d``."""

    n: int = 1000
    clusters: int = 10
    d: int = 2
    spread: float = 1.0
    box: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.n <= 0 or self.d <= 0 or self.clusters <= 0:
            raise ValueError("n, d and clusters must be positive")
        if self.spread < 0:
            raise ValueError("spread must be nonnegative")

    def describe(self):
        return (
            f"gaussian-mixture n={self.n} clusters={self.clusters} d={self.d} "
            f"spread={self.spread} box={self.box} seed={self.seed} rng={RNG_ID}"
        )


def gaussian_mixture(spec=None, **kwargs):
    """Return ``(data, labels)``; cluster sizes differ by at most one."""
    spec = spec or MixtureSpec(**kwargs)
    rng = make_rng(spec.seed)
    centers = rng.uniform(0.0, spec.box, size=(spec.clusters, spec.d))
    labels = np.arange(spec.n) % spec.clusters
    rng.shuffle(labels)
    data = centers[labels] + rng.normal(scale=spec.spread, size=(spec.n, spec.d))
    return data, labels


def write_csv(data, stream, comment=None):
    if comment:
        for line in comment.splitlines():
            stream.write(f"# {line}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"x{c}" for c in range(data.shape[1])])
    for row in data:
        writer.writerow([repr(float(v)) for v in row])


def read_csv(stream):
    """Numeric CSV with an optional header row and ``#`` comment lines."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rows = []
    width = None
    header_allowed = True
    for lineno, raw in enumerate(stream, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        fields = next(csv.reader([text]))
        try:
            values = [float(f) for f in fields]
        except ValueError:
            if header_allowed:
                header_allowed = False
                width = len(fields)
                continue
            raise ParseError(f"non-numeric field in {text!r}", lineno) from None
        header_allowed = False
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"expected {width} fields, got {len(values)}", lineno)
        if not all(np.isfinite(values)):
            raise ParseError("non-finite value", lineno)
        rows.append(values)
    if not rows:
        raise DataError("no data rows")
    return np.array(rows, dtype=np.float64)
