"""Initial rank lists and two-level neighbor expansion.

Everything here is a pure function of the distance matrix: the expansion
re-reads the already computed rank lists instead of building any tree or
graph structure, so it stays cheap even for large unions.
"""

from __future__ import annotations

import numpy as np

from ._kernels import sort_rows
from .core import ExpandedNeighborTable, RankListMatrix
from .errors import BadParamsError, ParamsTooLargeError, ShapeMismatchError


def build_rank_lists(distances: np.ndarray, threads: int = 1) -> RankListMatrix:
    """Sort every item's distance row into a self-first rank list.

    The item itself always takes position 1; remaining ties break by
    ascending item index (stable sort semantics), which keeps output
    identical across platforms and worker counts.
    """
    d = np.asarray(distances)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ShapeMismatchError(f"distance matrix must be square, got shape {d.shape}")
    order, pos = sort_rows(d, threads, build_pos=True)
    return RankListMatrix(order=order, pos=pos)


def expand_neighbors(rank_lists: RankListMatrix, t: int, q: int) -> ExpandedNeighborTable:
    """Collect each item's top-t picks plus each pick's own top-q picks.

    Picks skip list position 1 (the owner itself), but an item may still
    reappear deeper in its own table through a second-level pick;
    duplicates are kept, giving each row exactly t + t*q entries.
    """
    if t < 1 or q < 0:
        raise BadParamsError(f"need t >= 1 and q >= 0, got t={t}, q={q}")
    order = rank_lists.order
    n = order.shape[0]
    m = t + t * q
    if m > n or t + 1 > n:
        raise ParamsTooLargeError(
            f"t={t}, q={q} needs t + t*q <= n_items and t < n_items, got n_items={n}"
        )
    first = order[:, 1 : t + 1]
    if q == 0:
        table = np.ascontiguousarray(first)
    else:
        top_q = np.ascontiguousarray(order[:, 1 : q + 1])
        second = top_q[first.reshape(-1)].reshape(n, t * q)
        table = np.concatenate([first, second], axis=1)
    return ExpandedNeighborTable(neighbors=table.astype(np.int32, copy=False), t=t, q=q)
