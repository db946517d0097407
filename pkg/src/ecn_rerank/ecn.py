"""Expanded-cross-neighborhood re-ranking.

Two ingredients:

- a similarity between two items' rank lists, scored as the weighted
  overlap of their top-k prefixes (shared items near the front of both
  lists count most), computed for all pairs at once as W * W^T;
- an aggregation that, for an item pair, averages the distances between
  each item's expanded neighbor multiset and the other item.

The aggregation can run over the original distances or over the distance
derived from the rank-list similarity; `rerank` dispatches between those
variants and the bare rank-list distance.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from ._kernels import aggregate_neighbor_rows, scaled_one_minus
from .core import EcnParams, EvalRecords, ExpandedNeighborTable, Method, RankListMatrix
from .distance import pairwise_sq_euclidean
from .ranking import build_rank_lists, expand_neighbors
from .errors import (
    BadParamsError,
    DegenerateSimilarityError,
    IndexOutOfRangeError,
    NonFiniteError,
    ShapeMismatchError,
)


def rank_list_similarity(rank_lists: RankListMatrix, k: int, *, dense: bool = False) -> np.ndarray:
    """All-pairs weighted overlap of top-k rank-list prefixes.

    Entry (i, j) sums over every item b the product of b's weights in
    lists i and j, where an item at 1-based position p carries weight
    max(k + 1 - p, 0). Scores are integer-valued and exactly symmetric;
    with self-inclusive lists the diagonal is the global maximum.

    Each weight row has at most k nonzeros, so the default path builds W
    sparse and multiplies in O(n * k^2); dense=True materializes W fully
    (an O(n^3) product in float64) and exists as a cross-check.
    """
    if k < 1:
        raise BadParamsError(f"k must be >= 1, got {k}")
    if dense:
        w = np.maximum((k + 1) - rank_lists.pos.astype(np.float64), 0.0)
        return w @ w.T
    return np.asarray(_sparse_overlap(rank_lists, k).toarray(), dtype=np.float64)


def _weight_matrix(rank_lists: RankListMatrix, k: int) -> sparse.csr_matrix:
    n = rank_lists.n_items
    kk = min(k, n)
    weights = np.arange(k, k - kk, -1, dtype=np.float64)  # position 1..kk -> weight k..k-kk+1
    data = np.tile(weights, n)
    indices = rank_lists.order[:, :kk].astype(np.int64, copy=False).ravel()
    indptr = np.arange(0, n * kk + 1, kk, dtype=np.int64)
    return sparse.csr_matrix((data, indices, indptr), shape=(n, n))


def _sparse_overlap(rank_lists: RankListMatrix, k: int) -> sparse.csr_matrix:
    w = _weight_matrix(rank_lists, k)
    return w @ w.T


def rank_dist(similarity: np.ndarray) -> np.ndarray:
    """Turn rank-list similarity into a distance in [0, 1].

    Min-max rescales the whole matrix (diagonal included) and returns
    one minus the rescaled value. Self-inclusive lists put the global
    maximum on the diagonal, so the diagonal maps to exactly zero.
    """
    s = np.asarray(similarity, dtype=np.float64)
    smin = float(s.min())
    smax = float(s.max())
    if smax == smin:
        raise DegenerateSimilarityError(
            "all similarity entries are equal; min-max scaling undefined"
        )
    out = s - smin
    out /= smax - smin
    np.subtract(1.0, out, out=out)
    return out


def _rank_dist_from_lists(rank_lists: RankListMatrix, k: int, threads: int = 1) -> np.ndarray:
    """rank_dist(rank_list_similarity(...)) without dense intermediates.

    The overlap matrix has at most min(k, n)^2 nonzeros per row, so the
    min-max conversion is applied to the sparse values and the untouched
    zero entries all map to one fill value. Per-element arithmetic is the
    same as the public two-step path, so outputs match it bit for bit.
    """
    n = rank_lists.n_items
    overlap = _sparse_overlap(rank_lists, k)
    vals = overlap.data
    has_implicit_zero = overlap.nnz < n * n
    smin = min(float(vals.min()), 0.0) if has_implicit_zero else float(vals.min())
    smax = max(float(vals.max()), 0.0) if has_implicit_zero else float(vals.max())
    if smax == smin:
        raise DegenerateSimilarityError(
            "all similarity entries are equal; min-max scaling undefined"
        )
    return scaled_one_minus(overlap, smin, smax, n, threads)


def ecn_distance(
    base: np.ndarray,
    neighbors: ExpandedNeighborTable,
    query_indices: np.ndarray,
    gallery_indices: np.ndarray,
    threads: int = 1,
) -> np.ndarray:
    """Average cross distance between each pair's expanded neighbors.

    out[p, g] = (sum_j base[pn_j, g] + base[gn_j, p]) / (2 m) where pn
    runs over p's expanded neighbor row and gn over g's. base must be a
    square matrix over the same union the neighbor table was built from.
    threads bounds the worker count; this step needs only one worker and
    its output never depends on the budget.
    """
    b = np.asarray(base, dtype=np.float64)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ShapeMismatchError(f"base distance matrix must be square, got shape {b.shape}")
    n = b.shape[0]
    if neighbors.n_items != n:
        raise ShapeMismatchError(
            f"neighbor table covers {neighbors.n_items} items but base covers {n}"
        )
    table = neighbors.neighbors
    if table.min() < 0 or table.max() >= n:
        raise IndexOutOfRangeError("neighbor table holds indexes outside the union")
    q_idx = np.asarray(query_indices, dtype=np.int64)
    g_idx = np.asarray(gallery_indices, dtype=np.int64)
    for name, idx in (("query", q_idx), ("gallery", g_idx)):
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise IndexOutOfRangeError(f"{name} indexes fall outside the union of {n} items")
    m = table.shape[1]
    agg = aggregate_neighbor_rows(b, table, threads)
    out = agg[np.ix_(q_idx, g_idx)] + agg[np.ix_(g_idx, q_idx)].T
    out /= 2.0 * m
    return out


def rerank(
    records: EvalRecords,
    params: EcnParams,
    features: np.ndarray | None = None,
    distances: np.ndarray | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Run the full re-ranking pipeline; returns query x gallery distances.

    Exactly one of features/distances must be given. Features are turned
    into squared euclidean distances over the whole union; a precomputed
    distance matrix must be square over that union and is gently
    normalized (symmetrized, negatives clamped, diagonal zeroed).

    Rows of the output follow query item indexes in ascending order,
    columns gallery item indexes in ascending order.
    """
    if (features is None) == (distances is None):
        raise BadParamsError("pass exactly one of features= or distances=")
    n = records.n_items
    if features is not None:
        f = np.asarray(features)
        if f.ndim != 2 or f.shape[0] != n:
            raise ShapeMismatchError(
                f"feature matrix has shape {f.shape} but metadata describes {n} items"
            )
        base = pairwise_sq_euclidean(f, threads=threads)
    else:
        base = _as_union_distance(distances, n)
    q_idx = records.query_indices
    g_idx = records.gallery_indices
    if q_idx.size == 0 or g_idx.size == 0:
        raise BadParamsError("metadata must mark at least one query and one gallery item")

    if params.method is Method.NONE:
        return base[np.ix_(q_idx, g_idx)].copy()
    rank_lists = build_rank_lists(base, threads=threads)
    if params.method is Method.RANK_DIST:
        d = _rank_dist_from_lists(rank_lists, params.k, threads=threads)
        return d[np.ix_(q_idx, g_idx)].copy()
    nbrs = expand_neighbors(rank_lists, params.t, params.q)
    if params.method is Method.ECN_ORIG:
        return ecn_distance(base, nbrs, q_idx, g_idx, threads=threads)
    d = _rank_dist_from_lists(rank_lists, params.k, threads=threads)
    del base  # not needed for the rank-distance variant; frees n^2 floats
    return ecn_distance(d, nbrs, q_idx, g_idx, threads=threads)


def _as_union_distance(distances: np.ndarray, n_items: int) -> np.ndarray:
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ShapeMismatchError(
            f"precomputed distances must form a square union matrix, got shape {d.shape}"
        )
    if d.shape[0] != n_items:
        raise ShapeMismatchError(
            f"distance matrix covers {d.shape[0]} items but metadata describes {n_items}"
        )
    finite = np.isfinite(d)
    if not finite.all():
        raise NonFiniteError(int(np.flatnonzero(~finite.ravel())[0]), context="distance matrix")
    d = 0.5 * (d + d.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d
