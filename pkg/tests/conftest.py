import itertools

import numpy as np
import pytest

from fastpam.datasets import MixtureSpec, gaussian_mixture
from fastpam.dissimilarity import build_matrix

SIX = [0.0, 1.0, 2.0, 6.0, 7.0, 8.0]


def six_matrix():
    return build_matrix(np.array(SIX)[:, None], "manhattan")


@pytest.fixture
def six():
    return six_matrix()


def oracle_td(square, medoids):
    """TD from a dense square matrix, independent of the package kernels."""
    return float(np.asarray(square)[:, list(medoids)].min(axis=1).sum())


def brute_optimum(square, k):
    """Exhaustive minimum TD over all C(n, k) medoid sets."""
    square = np.asarray(square)
    best = (np.inf, None)
    for combo in itertools.combinations(range(len(square)), k):
        td = square[:, combo].min(axis=1).sum()
        if td < best[0]:
            best = (float(td), combo)
    return best


def random_instance(seed, n_range=(20, 80), k_range=(2, 10), d_range=(1, 3)):
    """Seeded small instance: uniform or Gaussian-mixture vectors, euclidean."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    k = int(rng.integers(k_range[0], min(k_range[1], n - 1) + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    if seed % 2:
        data = rng.uniform(0, 10, size=(n, d))
    else:
        data, _ = gaussian_mixture(
            MixtureSpec(n=n, clusters=int(rng.integers(2, 6)), d=d, spread=1.5, box=20.0,
                        seed=int(rng.integers(2**32)))
        )
    return build_matrix(data, "euclidean"), k


def mixture_matrix(n, clusters, seed, d=2):
    data, labels = gaussian_mixture(MixtureSpec(n=n, clusters=clusters, d=d, seed=seed))
    return build_matrix(data, "euclidean"), data, labels


# acceptance reporting: one line per criterion in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        status, name, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:>2} {status}: {name} | {detail}")
