"""Compiled hot loops, with pure-numpy fallbacks.

Every kernel is embarrassingly parallel over rows and runs a fixed
per-element operation sequence, so output never depends on the worker
count. The sort kernel is an LSD radix argsort over the raw float bits
(order-isomorphic for non-negative finite doubles), which is stable by
construction and therefore breaks distance ties by ascending index
without a separate detection pass.
"""

from __future__ import annotations

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False


def _bound_threads(threads: int) -> None:
    if HAVE_NUMBA:
        limit = numba.config.NUMBA_NUM_THREADS
        numba.set_num_threads(max(1, min(threads, limit)))


if HAVE_NUMBA:

    @numba.njit(cache=True, parallel=True)
    def _sort_rows_radix(d, order, pos, build_pos):  # pragma: no cover - compiled
        n = d.shape[0]
        for i in numba.prange(n):
            fkeys = np.empty(n, dtype=np.float64)
            for b in range(n):
                fkeys[b] = d[i, b] + 0.0  # +0.0 folds -0.0 into +0.0
            keys = fkeys.view(np.uint64)
            for b in range(n):
                keys[b] += np.uint64(1)
            keys[i] = np.uint64(0)  # self sorts below any real distance

            idx = np.empty(n, dtype=np.int32)
            for b in range(n):
                idx[b] = b
            tmp_k = np.empty(n, dtype=np.uint64)
            tmp_i = np.empty(n, dtype=np.int32)
            count = np.empty(257, dtype=np.int64)
            for shift in range(0, 64, 8):
                count[:] = 0
                for b in range(n):
                    byte = (keys[b] >> np.uint64(shift)) & np.uint64(0xFF)
                    count[np.int64(byte) + 1] += 1
                skip = False
                for c in range(256):
                    if count[c + 1] == n:
                        skip = True
                        break
                if skip:
                    continue
                for c in range(256):
                    count[c + 1] += count[c]
                for b in range(n):
                    byte = np.int64((keys[b] >> np.uint64(shift)) & np.uint64(0xFF))
                    p = count[byte]
                    count[byte] = p + 1
                    tmp_k[p] = keys[b]
                    tmp_i[p] = idx[b]
                keys, tmp_k = tmp_k, keys
                idx, tmp_i = tmp_i, idx
            order[i, :] = idx
            if build_pos:
                for r in range(n):
                    pos[i, idx[r]] = r + 1

    @numba.njit(cache=True, parallel=True)
    def _sq_euclidean_tiled(g, sq, out):  # pragma: no cover - compiled
        n = g.shape[0]
        tile = 128
        nblocks = (n + tile - 1) // tile
        for bi in numba.prange(nblocks):
            i0 = bi * tile
            i1 = min(i0 + tile, n)
            for j0 in range(0, n, tile):
                j1 = min(j0 + tile, n)
                for i in range(i0, i1):
                    si = sq[i]
                    for c in range(j0, j1):
                        v = si + sq[c] - (g[i, c] + g[c, i])
                        out[i, c] = v if v > 0.0 else 0.0
            for i in range(i0, i1):
                out[i, i] = 0.0

    @numba.njit(cache=True, parallel=True)
    def _aggregate_rows_numba(base, table, out):  # pragma: no cover - compiled
        n, m = table.shape
        for i in numba.prange(n):
            first = table[i, 0]
            for c in range(n):
                out[i, c] = base[first, c]
            for j in range(1, m):
                r = table[i, j]
                for c in range(n):
                    out[i, c] += base[r, c]

    @numba.njit(cache=True, parallel=True)
    def _scaled_fill_numba(indptr, indices, data, smin, sden, fill, out):  # pragma: no cover
        n = out.shape[0]
        for i in numba.prange(n):
            for c in range(n):
                out[i, c] = fill
            for p in range(indptr[i], indptr[i + 1]):
                out[i, indices[p]] = 1.0 - (data[p] - smin) / sden


def sort_rows(d: np.ndarray, threads: int, build_pos: bool = True):
    """Argsort each row of a non-negative distance matrix, self first,
    remaining ties by ascending index; optionally also build the inverse
    1-based position map."""
    n = d.shape[0]
    order = np.empty((n, n), dtype=np.int32)
    pos = np.empty((n, n) if build_pos else (0, 0), dtype=np.int32)
    if HAVE_NUMBA:
        _bound_threads(threads)
        _sort_rows_radix(np.ascontiguousarray(d, dtype=np.float64), order, pos, build_pos)
        return order, (pos if build_pos else None)

    from ._parallel import run_chunked

    ranks = np.arange(1, n + 1, dtype=np.int32)[None, :]

    def fill(lo: int, hi: int) -> None:
        block = d[lo:hi].astype(np.float64)
        block[np.arange(hi - lo), np.arange(lo, hi)] = -1.0
        ob = np.argsort(block, axis=1, kind="quicksort")
        # quicksort orders ties arbitrarily; redo affected rows stably
        sorted_vals = np.take_along_axis(block, ob, axis=1)
        ties = np.flatnonzero((sorted_vals[:, 1:] == sorted_vals[:, :-1]).any(axis=1))
        if ties.size:
            ob[ties] = np.argsort(block[ties], axis=1, kind="stable")
        ob = ob.astype(np.int32, copy=False)
        order[lo:hi] = ob
        if build_pos:
            np.put_along_axis(pos[lo:hi], ob, ranks, axis=1)

    run_chunked(n, threads, fill)
    return order, (pos if build_pos else None)


def sq_euclidean_from_gram(g: np.ndarray, sq: np.ndarray, threads: int) -> np.ndarray:
    """Assemble clamped squared distances sq_i + sq_j - (g_ij + g_ji) from
    a gram matrix; exactly symmetric with a zero diagonal."""
    n = g.shape[0]
    if HAVE_NUMBA:
        _bound_threads(threads)
        out = np.empty((n, n), dtype=np.float64)
        _sq_euclidean_tiled(np.ascontiguousarray(g, dtype=np.float64), sq, out)
        return out
    d = sq[:, None] + sq[None, :]
    d -= g + g.T
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def aggregate_neighbor_rows(base: np.ndarray, table: np.ndarray, threads: int) -> np.ndarray:
    """Sum base rows over each item's neighbor multiset, in table order."""
    n = base.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    if HAVE_NUMBA:
        _bound_threads(threads)
        _aggregate_rows_numba(
            np.ascontiguousarray(base, dtype=np.float64),
            np.ascontiguousarray(table, dtype=np.int64),
            out,
        )
        return out

    from scipy import sparse

    m = table.shape[1]
    counts = sparse.csr_matrix(
        (
            np.ones(table.size, dtype=np.float64),
            (np.repeat(np.arange(n, dtype=np.int64), m), table.astype(np.int64).ravel()),
        ),
        shape=(n, n),
    )
    block_cols = int(np.clip((4 * 2**20) // (8 * n), 16, n))
    for c0 in range(0, n, block_cols):
        c1 = min(c0 + block_cols, n)
        out[:, c0:c1] = counts @ np.ascontiguousarray(base[:, c0:c1])
    return out


def scaled_one_minus(overlap_csr, smin: float, smax: float, n: int, threads: int) -> np.ndarray:
    """Densify 1 - minmax(overlap) given the sparse overlap scores.

    Entries absent from the sparse matrix are implicit zeros and all map
    to the same fill value; stored entries get the elementwise transform.
    """
    sden = smax - smin
    fill = 1.0 - (0.0 - smin) / sden
    out = np.empty((n, n), dtype=np.float64)
    if HAVE_NUMBA:
        _bound_threads(threads)
        _scaled_fill_numba(
            overlap_csr.indptr.astype(np.int64, copy=False),
            overlap_csr.indices.astype(np.int64, copy=False),
            overlap_csr.data.astype(np.float64, copy=False),
            smin,
            sden,
            fill,
            out,
        )
        return out
    out.fill(fill)
    coo = overlap_csr.tocoo()
    out[coo.row, coo.col] = 1.0 - (coo.data - smin) / sden
    return out
