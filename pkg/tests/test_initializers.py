import math

import numpy as np
import pytest

from conftest import SIX, mixture_matrix, oracle_td
from fastpam.core import compute_td
from fastpam.dissimilarity import build_matrix
from fastpam.initializers import (
    InitConfig,
    build_init,
    initialize,
    kmeanspp_init,
    lab_init,
    lab_sample_size,
    parkjun_init,
    parkjun_scores,
    random_init,
    random_medoids,
)


def values(state):
    return sorted(SIX[i] for i in state.medoids)


def greedy_gains(square, medoids):
    """Oracle for one BUILD step: TD change of adding each non-medoid."""
    dmin = square[:, medoids].min(axis=1)
    return {
        j: float(np.minimum(square[:, j] - dmin, 0).sum())
        for j in range(len(square))
        if j not in medoids
    }


def test_build_k1(six):
    state = build_init(six, 1)
    assert values(state) == [2.0] and state.td == 18.0


def test_build_k2_and_gains(six):
    gains = greedy_gains(six.to_square(), [SIX.index(2.0)])
    assert gains[SIX.index(7.0)] == -13.0
    assert gains[SIX.index(6.0)] == -12.0
    assert gains[SIX.index(8.0)] == -12.0
    state = build_init(six, 2)
    assert values(state) == [2.0, 7.0] and state.td == 5.0
    assert state.medoids.tolist() == [SIX.index(2.0), SIX.index(7.0)]


def test_build_matches_greedy_oracle():
    rng = np.random.default_rng(0)
    for trial in range(10):
        m = build_matrix(rng.normal(size=(25, 2)))
        sq = m.to_square()
        chosen = [int(np.argmin(sq.sum(axis=0)))]
        for _ in range(4):
            gains = greedy_gains(sq, chosen)
            chosen.append(min(gains, key=lambda j: (gains[j], j)))
        state = build_init(m, 5)
        assert state.medoids.tolist() == chosen
        assert state.td == pytest.approx(oracle_td(sq, chosen), rel=1e-12)


def test_build_k_n_minus_one_consistent(six):
    state = build_init(six, 5)
    assert state.td == compute_td(six, state.medoids)
    with pytest.raises(ValueError):
        build_init(six, 6)


def test_lab_full_sample_equals_build(six):
    state = lab_init(six, 2, seed=3, sample_size=6)
    assert state.medoids.tolist() == build_init(six, 2).medoids.tolist()


def test_lab_degenerates_to_build_when_sample_covers_population():
    m = build_matrix(np.random.default_rng(1).normal(size=(12, 2)))
    assert lab_sample_size(12) == 14
    for seed in range(5):
        assert lab_init(m, 4, seed).medoids.tolist() == build_init(m, 4).medoids.tolist()


def test_lab_deterministic_and_distinct():
    m, _, _ = mixture_matrix(300, 5, seed=2)
    a = lab_init(m, 8, seed=11)
    b = lab_init(m, 8, seed=11)
    assert a.medoids.tolist() == b.medoids.tolist()
    assert len(set(a.medoids.tolist())) == 8
    assert a.td == compute_td(m, a.medoids)


def test_lab_lookups_linear_build_quadratic():
    counts = {}
    for n in (400, 800):
        m, _, _ = mixture_matrix(n, 5, seed=0)
        m.lookups = 0
        lab_init(m, 5, seed=0)
        lab = m.lookups
        m.lookups = 0
        build_init(m, 5)
        counts[n] = (lab, m.lookups)
    assert counts[800][0] / counts[400][0] <= 2.5
    assert counts[800][1] / counts[400][1] >= 3.5


def test_kmeanspp_first_is_uniform():
    n, runs = 8, 10_000
    m = build_matrix(np.arange(n, dtype=float)[:, None], "manhattan")
    hits = np.bincount([kmeanspp_init(m, 1, seed=s).medoids[0] for s in range(runs)], minlength=n)
    p = 1 / n
    sigma = math.sqrt(runs * p * (1 - p))
    assert np.all(np.abs(hits - runs * p) <= 5 * sigma)


def test_kmeanspp_outlier_probability():
    data = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 100.0])[:, None]
    m = build_matrix(data, "manhattan")
    sq = m.to_square()
    n, out = 6, 5
    # exact categorical probability that the outlier is the second medoid
    p = sum(sq[f, out] / sq[f].sum() for f in range(n) if f != out) / n
    runs = 10_000
    hits = sum(kmeanspp_init(m, 2, seed=s).medoids[1] == out for s in range(runs))
    sigma = math.sqrt(runs * p * (1 - p))
    assert abs(hits - runs * p) <= 5 * sigma


def test_kmeanspp_duplicates_fall_back():
    m = build_matrix(np.ones((5, 2)))
    state = kmeanspp_init(m, 2, seed=0)
    assert len(set(state.medoids.tolist())) == 2
    assert state.td == 0.0


def test_parkjun_central_choice():
    m = build_matrix(np.array([-2.0, -1.0, 0.0, 1.0, 2.0])[:, None], "manhattan")
    assert parkjun_init(m, 1).medoids.tolist() == [2]
    assert parkjun_init(m, 2).medoids.tolist() == [2, 1]
    scores = parkjun_scores(m)
    assert scores[1] == scores[3]


def test_parkjun_matches_formula_oracle():
    rng = np.random.default_rng(7)
    m = build_matrix(rng.uniform(size=(20, 2)))
    sq = m.to_square()
    expect = (sq / sq.sum(axis=1, keepdims=True)).sum(axis=0)
    np.testing.assert_allclose(parkjun_scores(m), expect, rtol=1e-12)
    chosen = parkjun_init(m, 6).medoids.tolist()
    assert len(set(chosen)) == 6
    assert chosen == np.argsort(expect, kind="stable")[:6].tolist()


def test_parkjun_zero_row_sums():
    m = build_matrix(np.zeros((4, 1)))
    assert parkjun_scores(m).tolist() == [0.0] * 4
    assert parkjun_init(m, 2).medoids.tolist() == [0, 1]


def test_random_init_uniform_and_deterministic():
    n, runs = 10, 10_000
    m = build_matrix(np.arange(n, dtype=float)[:, None])
    assert random_init(m, 3, 5).medoids.tolist() == random_init(m, 3, 5).medoids.tolist()
    hits = np.zeros(n)
    for s in range(runs):
        picked = random_medoids(n, 3, s)
        assert len(set(picked.tolist())) == 3
        hits[picked] += 1
    p = 3 / n
    sigma = math.sqrt(runs * p * (1 - p))
    assert np.all(np.abs(hits - runs * p) <= 5 * sigma)
    with pytest.raises(ValueError):
        random_medoids(n, n, 0)


@pytest.mark.parametrize("method", ["build", "lab", "kmeanspp", "random", "parkjun"])
def test_every_initializer_consistent(method):
    m, _, _ = mixture_matrix(120, 4, seed=3)
    state = initialize(m, 6, InitConfig(method, seed=9))
    assert len(set(state.medoids.tolist())) == 6
    assert state.td == compute_td(m, state.medoids)
    assert state.td == pytest.approx(oracle_td(m.to_square(), state.medoids), rel=1e-12)


def test_unknown_method():
    with pytest.raises(ValueError):
        InitConfig("kmeans")
