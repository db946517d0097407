import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecn_rerank.core import EcnParams, EvalRecords, Method, RankListMatrix
from ecn_rerank.distance import pairwise_sq_euclidean
from ecn_rerank.ecn import (
    _rank_dist_from_lists,
    ecn_distance,
    rank_dist,
    rank_list_similarity,
    rerank,
)
from ecn_rerank.errors import (
    BadParamsError,
    DegenerateSimilarityError,
    IndexOutOfRangeError,
    ShapeMismatchError,
)
from ecn_rerank.ranking import build_rank_lists, expand_neighbors

LINE_POINTS = np.array([[0.0], [1.0], [3.0]])


def lists_from_orders(orders):
    order = np.asarray(orders, dtype=np.int32)
    n = order.shape[0]
    pos = np.empty_like(order)
    np.put_along_axis(pos, order, np.arange(1, n + 1, dtype=np.int32)[None, :], axis=1)
    return RankListMatrix(order=order, pos=pos)


def random_rank_lists(seed, n):
    rng = np.random.Generator(np.random.PCG64(seed))
    d = rng.random((n, n))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return build_rank_lists(d)


def test_similarity_three_list_fixture():
    rl = lists_from_orders([[0, 1, 2], [1, 0, 2], [2, 0, 1]])
    r = rank_list_similarity(rl, 2)
    # weights for K=2: list [0,1,2] -> [2,1,0]; list [1,0,2] -> [1,2,0]
    assert r[0, 1] == 4.0
    assert np.all(np.diag(r) == 5.0)  # 2^2 + 1^2


def test_similarity_disjoint_topk_is_zero():
    rl = lists_from_orders([[0, 1, 2, 3], [2, 3, 0, 1], [2, 3, 0, 1], [3, 2, 1, 0]])
    r = rank_list_similarity(rl, 2)
    assert r[0, 1] == 0.0


def test_similarity_self_closed_form():
    for k in (1, 2, 5, 30):
        rl = random_rank_lists(3, 12)
        r = rank_list_similarity(rl, k)
        expected = sum((k + 1 - p) ** 2 for p in range(1, min(k, 12) + 1))
        assert np.all(np.diag(r) == expected)
        assert r.max() == expected  # diagonal is the global maximum


def test_similarity_dense_and_sparse_agree():
    rl = random_rank_lists(11, 40)
    for k in (1, 7, 25, 60):
        assert np.array_equal(rank_list_similarity(rl, k), rank_list_similarity(rl, k, dense=True))


def test_similarity_exactly_symmetric():
    rl = random_rank_lists(13, 60)
    r = rank_list_similarity(rl, 25)
    assert np.array_equal(r, r.T)


def test_similarity_rejects_bad_k():
    with pytest.raises(BadParamsError):
        rank_list_similarity(random_rank_lists(1, 5), 0)


def test_rank_dist_fixture():
    d = rank_dist(np.array([[5.0, 4.0], [4.0, 5.0]]))
    assert d.tolist() == [[0.0, 1.0], [1.0, 0.0]]


def test_rank_dist_diag_zero_and_range():
    rl = random_rank_lists(19, 30)
    d = rank_dist(rank_list_similarity(rl, 10))
    assert np.all(np.diag(d) == 0.0)
    assert d.min() >= 0.0 and d.max() <= 1.0


def test_rank_dist_degenerate():
    with pytest.raises(DegenerateSimilarityError):
        rank_dist(np.full((3, 3), 7.0))


def test_fused_rank_dist_matches_two_step_path():
    for seed, n, k in ((3, 17, 4), (5, 60, 25), (7, 30, 60), (9, 40, 1)):
        rl = random_rank_lists(seed, n)
        fused = _rank_dist_from_lists(rl, k)
        two_step = rank_dist(rank_list_similarity(rl, k))
        assert np.array_equal(fused, two_step)


def test_ecn_line_points_hand_traced():
    base = pairwise_sq_euclidean(LINE_POINTS)
    table = expand_neighbors(build_rank_lists(base), t=1, q=1)
    out = ecn_distance(base, table, [0], [1, 2])
    # N(0) = [1, 0], N(2) = [1, 0]: (d(1,2) + d(0,2) + d(1,0) + d(0,0)) / 4
    assert out[0, 1] == 3.5
    assert out[0, 0] == 0.5


def test_ecn_q0_reduces_to_top_t_average():
    rng = np.random.Generator(np.random.PCG64(21))
    base = pairwise_sq_euclidean(rng.standard_normal((12, 3)))
    rl = build_rank_lists(base)
    t = 4
    table = expand_neighbors(rl, t=t, q=0)
    out = ecn_distance(base, table, np.arange(12), np.arange(12))
    top = rl.order[:, 1 : t + 1]
    expected = np.empty((12, 12))
    for p in range(12):
        for g in range(12):
            expected[p, g] = (base[top[p], g].sum() + base[top[g], p].sum()) / (2 * t)
    assert np.allclose(out, expected, rtol=1e-15, atol=0)


def test_ecn_affine_invariance():
    rng = np.random.Generator(np.random.PCG64(29))
    base = pairwise_sq_euclidean(rng.standard_normal((30, 4)))
    table = expand_neighbors(build_rank_lists(base), t=3, q=2)
    q_idx, g_idx = np.arange(6), np.arange(6, 30)
    out = ecn_distance(base, table, q_idx, g_idx)
    scaled = ecn_distance(2.5 * base + 1.25, table, q_idx, g_idx)
    assert np.allclose(scaled, 2.5 * out + 1.25, rtol=1e-12)
    # induced per-query ranking unchanged
    assert np.array_equal(np.argsort(scaled, axis=1), np.argsort(out, axis=1))


def test_ecn_index_errors():
    base = pairwise_sq_euclidean(LINE_POINTS)
    table = expand_neighbors(build_rank_lists(base), t=1, q=1)
    with pytest.raises(IndexOutOfRangeError):
        ecn_distance(base, table, [0], [5])
    bad = type(table)(neighbors=np.array([[3, 0], [0, 1], [1, 0]], dtype=np.int32), t=1, q=1)
    with pytest.raises(IndexOutOfRangeError):
        ecn_distance(base, bad, [0], [1])


def _records_for(n, n_queries):
    is_query = np.zeros(n, dtype=bool)
    is_query[:n_queries] = True
    return EvalRecords(
        person_ids=np.arange(1, n + 1),
        camera_ids=np.zeros(n, dtype=np.int64),
        is_query=is_query,
    )


def test_rerank_none_is_passthrough():
    rng = np.random.Generator(np.random.PCG64(31))
    feats = rng.standard_normal((10, 3))
    recs = _records_for(10, 3)
    out = rerank(recs, EcnParams(method=Method.NONE), features=feats)
    base = pairwise_sq_euclidean(feats)
    assert np.array_equal(out, base[np.ix_(recs.query_indices, recs.gallery_indices)])


def test_rerank_matches_manual_composition():
    rng = np.random.Generator(np.random.PCG64(37))
    feats = rng.standard_normal((30, 5)).astype(np.float32)
    recs = _records_for(30, 6)
    params = EcnParams(t=3, q=8, k=25, method=Method.ECN_ORIG)
    out = rerank(recs, params, features=feats)
    base = pairwise_sq_euclidean(feats)
    table = expand_neighbors(build_rank_lists(base), params.t, params.q)
    manual = ecn_distance(base, table, recs.query_indices, recs.gallery_indices)
    assert np.array_equal(out, manual)


def test_rerank_accepts_precomputed_distances():
    rng = np.random.Generator(np.random.PCG64(41))
    feats = rng.standard_normal((20, 4))
    recs = _records_for(20, 5)
    base = pairwise_sq_euclidean(feats)
    for method in Method:
        params = EcnParams(t=2, q=3, k=10, method=method)
        from_feats = rerank(recs, params, features=feats)
        from_dists = rerank(recs, params, distances=base)
        assert np.array_equal(from_feats, from_dists)


def test_rerank_requires_exactly_one_input():
    recs = _records_for(4, 1)
    feats = np.ones((4, 2))
    with pytest.raises(BadParamsError):
        rerank(recs, EcnParams())
    with pytest.raises(BadParamsError):
        rerank(recs, EcnParams(), features=feats, distances=np.zeros((4, 4)))


def test_rerank_shape_checks():
    recs = _records_for(4, 1)
    with pytest.raises(ShapeMismatchError):
        rerank(recs, EcnParams(), features=np.ones((5, 2)))
    with pytest.raises(ShapeMismatchError):
        rerank(recs, EcnParams(), distances=np.zeros((4, 5)))


def test_rerank_output_covers_whole_gallery():
    rng = np.random.Generator(np.random.PCG64(43))
    feats = rng.standard_normal((40, 6))
    recs = _records_for(40, 8)
    out = rerank(recs, EcnParams(t=2, q=4, k=10), features=feats)
    assert out.shape == (8, 32)
    assert np.all(np.isfinite(out))
    ranking = np.argsort(out, axis=1)
    assert np.array_equal(np.sort(ranking, axis=1), np.tile(np.arange(32), (8, 1)))


def test_rerank_thread_count_invariant():
    rng = np.random.Generator(np.random.PCG64(47))
    feats = rng.standard_normal((300, 8)).astype(np.float32)
    recs = _records_for(300, 60)
    outs = [
        rerank(recs, EcnParams(), features=feats, threads=threads) for threads in (1, 2, 8)
    ]
    assert outs[0].tobytes() == outs[1].tobytes() == outs[2].tobytes()


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_ecn_symmetric_role_of_pair_members(seed):
    # swapping which side of a pair is "query" must not change its distance
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(rng.integers(6, 25))
    feats = rng.standard_normal((n, 4))
    base = pairwise_sq_euclidean(feats)
    t = int(rng.integers(1, min(4, n - 1) + 1))
    q_max = min(6, max(0, (n - t) // t - 1))
    q = int(rng.integers(0, q_max + 1))
    table = expand_neighbors(build_rank_lists(base), t=t, q=q)
    idx = np.arange(n)
    full = ecn_distance(base, table, idx, idx)
    assert np.allclose(full, full.T, rtol=0, atol=0)
