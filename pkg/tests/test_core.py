import numpy as np
import pytest

from conftest import SIX, oracle_td, six_matrix
from fastpam.core import (
    AssignmentCache,
    DataError,
    DissimilarityMatrix,
    MedoidState,
    SwapCandidate,
    apply_swap,
    cache_td,
    change,
    compute_td,
    rebuild_cache,
    swap_delta,
)
from fastpam.dissimilarity import build_matrix


def idx(*values):
    return [SIX.index(v) for v in values]


def test_compute_td_six_points(six):
    assert compute_td(six, idx(1, 7)) == 4.0
    assert compute_td(six, idx(2, 7)) == 5.0


def test_compute_td_all_objects_is_zero(six):
    assert compute_td(six, range(6)) == 0.0


def test_compute_td_errors(six):
    with pytest.raises(IndexError):
        compute_td(six, [0, 6])
    with pytest.raises(ValueError):
        compute_td(six, [])
    with pytest.raises(ValueError):
        compute_td(six, [1, 1])


def test_matrix_storage_and_access():
    square = np.array([[0, 3, 4], [3, 0, 1], [4, 1, 0]], dtype=float)
    m = DissimilarityMatrix.from_square(square)
    assert list(m.values) == [3.0, 4.0, 1.0]
    assert m[0, 2] == m[2, 0] == 4.0
    assert m[1, 1] == 0.0
    np.testing.assert_array_equal(m.to_square(), square)
    np.testing.assert_array_equal(m.row(1), square[1])
    np.testing.assert_array_equal(m.block([2, 0], [1, 2]), square[[2, 0]][:, [1, 2]])
    sub = m.submatrix([2, 0])
    assert sub.n == 2 and sub[0, 1] == 4.0
    with pytest.raises(ValueError):
        m.values[0] = 1.0


def test_matrix_rejects_bad_values():
    with pytest.raises(DataError):
        DissimilarityMatrix(2, [-1.0])
    with pytest.raises(DataError):
        DissimilarityMatrix(2, [np.nan])
    with pytest.raises(ValueError):
        DissimilarityMatrix(3, [1.0, 2.0])
    with pytest.raises(DataError):
        DissimilarityMatrix.from_square([[0, 1], [2, 0]])


def test_lookup_counter(six):
    six.lookups = 0
    six[0, 1]
    six.row(2)
    assert six.lookups == 1 + 5


def test_rebuild_cache_six_points(six):
    cache = rebuild_cache(six, idx(1, 7))
    assert cache.nearest.tolist() == [0, 0, 0, 1, 1, 1]
    assert cache.dnear.tolist() == [1, 0, 1, 1, 0, 1]
    assert cache.second.tolist() == [1, 1, 1, 0, 0, 0]
    assert cache.dsecond.tolist() == [7, 6, 5, 5, 6, 7]


def test_rebuild_cache_ties_go_to_lower_slot():
    # object 1 sits halfway between the two medoids
    m = build_matrix(np.array([[0.0], [1.0], [2.0]]), "manhattan")
    cache = rebuild_cache(m, [2, 0])
    assert cache.nearest[1] == 0 and cache.second[1] == 1
    cache = rebuild_cache(m, [0, 2])
    assert cache.nearest[1] == 0


def test_medoids_self_assign_even_with_duplicates():
    m = build_matrix(np.zeros((4, 1)), "euclidean")
    cache = rebuild_cache(m, [3, 1])
    assert cache.nearest[3] == 0 and cache.nearest[1] == 1
    assert cache.nearest[0] == 0 and cache.nearest[2] == 0


def test_single_medoid_sentinel(six):
    cache = rebuild_cache(six, [2])
    assert np.all(np.isinf(cache.dsecond))
    assert np.all(cache.second == -1)


def test_change_function_example(six):
    state = MedoidState(idx(2, 7), 5.0)
    cache = rebuild_cache(six, state.medoids)
    # object 0 loses its medoid (value 2) to candidate value 1
    assert change(six, cache, 0, 0, idx(1)[0]) == -1.0
    # other-slot case, candidate farther than nearest: zero
    assert change(six, cache, 0, 1, idx(8)[0]) == 0.0
    # own-slot case, candidate beyond second nearest: d_s - d_n
    assert change(six, cache, 1, 0, idx(8)[0]) == cache.dsecond[1] - cache.dnear[1]


def test_apply_swap_example(six):
    state = MedoidState(idx(2, 7), 5.0)
    cache = rebuild_cache(six, state.medoids)
    delta = swap_delta(six, state, cache, 0, idx(1)[0])
    assert delta == -1.0
    apply_swap(state, cache, SwapCandidate(0, idx(1)[0], delta), six)
    assert state.medoids.tolist() == idx(1, 7)
    assert state.td == 4.0 == compute_td(six, state.medoids)
    assert cache.equals(rebuild_cache(six, state.medoids))


def test_apply_swap_inverse_restores_td(six):
    state = MedoidState(idx(2, 7), 5.0)
    cache = rebuild_cache(six, state.medoids)
    d1 = swap_delta(six, state, cache, 1, idx(8)[0])
    apply_swap(state, cache, SwapCandidate(1, idx(8)[0], d1), six)
    d2 = swap_delta(six, state, cache, 1, idx(7)[0])
    apply_swap(state, cache, SwapCandidate(1, idx(7)[0], d2), six)
    assert state.td == pytest.approx(5.0, rel=1e-9)
    assert cache.equals(rebuild_cache(six, idx(2, 7)))


def test_apply_swap_rejects_medoid_candidate(six):
    state = MedoidState(idx(2, 7), 5.0)
    cache = rebuild_cache(six, state.medoids)
    with pytest.raises(ValueError):
        apply_swap(state, cache, SwapCandidate(0, idx(7)[0], 0.0), six)
    with pytest.raises(IndexError):
        apply_swap(state, cache, SwapCandidate(2, 0, 0.0), six)


def test_swap_delta_matches_oracle_random():
    rng = np.random.default_rng(5)
    data = rng.normal(size=(30, 2))
    m = build_matrix(data, "euclidean")
    sq = m.to_square()
    medoids = [3, 11, 20, 27]
    state = MedoidState(medoids, compute_td(m, medoids))
    cache = rebuild_cache(m, medoids)
    for slot in range(4):
        for j in range(30):
            if j in medoids:
                continue
            after = list(medoids)
            after[slot] = j
            expect = oracle_td(sq, after) - oracle_td(sq, medoids)
            assert swap_delta(m, state, cache, slot, j) == pytest.approx(expect, abs=1e-9)


def test_cache_td_and_empty():
    m = six_matrix()
    cache = rebuild_cache(m, [2, 4])
    assert cache_td(cache) == 5.0
    empty = AssignmentCache.empty(3)
    assert empty.nearest.tolist() == [-1, -1, -1]
    assert cache.copy().equals(cache)
