"""Shared array types and parameter containers.

Conventions used throughout the package:

- feature matrices are 2-D float arrays, one row per item;
- distance matrices are square, symmetric, non-negative, zero diagonal;
- rank lists are self-inclusive: list i starts with item i itself, the
  remaining items ordered by ascending distance with ties broken by
  ascending item index;
- sums are accumulated in float64 even when inputs are float32.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    BadParamsError,
    DuplicateIndexError,
    EmptyMatrixError,
    IndexGapError,
    NonFiniteError,
    ShapeMismatchError,
)


class Role(str, enum.Enum):
    QUERY = "query"
    GALLERY = "gallery"


class Method(str, enum.Enum):
    """Re-ranking method selector.

    NONE       passthrough: original distances sliced query x gallery
    RANK_DIST  distance derived from weighted rank-list overlap alone
    ECN_ORIG   expanded-neighbor aggregation over original distances
    ECN_RANK   expanded-neighbor aggregation over rank-list distances
    """

    NONE = "none"
    RANK_DIST = "rank-dist"
    ECN_ORIG = "ecn-orig"
    ECN_RANK = "ecn-rank"


@dataclass(frozen=True)
class EcnParams:
    """Re-ranking parameters.

    t: first-level neighbors per item, q: second-level neighbors per
    first-level pick, k: rank-list truncation depth for the overlap
    similarity. Defaults t=3, q=8, k=25 work across widely different
    dataset sizes; small sets can score higher with k=10.
    """

    t: int = 3
    q: int = 8
    k: int = 25
    method: Method = Method.ECN_RANK

    def __post_init__(self):
        if self.t < 1:
            raise BadParamsError(f"t must be >= 1, got {self.t}")
        if self.q < 0:
            raise BadParamsError(f"q must be >= 0, got {self.q}")
        if self.k < 1:
            raise BadParamsError(f"k must be >= 1, got {self.k}")

    @property
    def m(self) -> int:
        """Entries in each expanded neighbor row: t + t*q."""
        return self.t + self.t * self.q


@dataclass(frozen=True)
class EvalRecord:
    item_index: int
    person_id: int
    camera_id: int
    role: Role


@dataclass(frozen=True)
class EvalRecords:
    """Per-item identity, camera, and query/gallery role, stored densely
    by item index (row i of the matrices describes item i)."""

    person_ids: np.ndarray  # int64 (n,)
    camera_ids: np.ndarray  # int64 (n,)
    is_query: np.ndarray  # bool (n,)

    def __post_init__(self):
        n = len(self.person_ids)
        if len(self.camera_ids) != n or len(self.is_query) != n:
            raise ShapeMismatchError("metadata arrays must share one length")

    @classmethod
    def from_records(cls, records: Iterable[EvalRecord]) -> "EvalRecords":
        items = list(records)
        n = len(items)
        person = np.zeros(n, dtype=np.int64)
        camera = np.zeros(n, dtype=np.int64)
        query = np.zeros(n, dtype=bool)
        seen = np.zeros(n, dtype=bool)
        for rec in items:
            idx = rec.item_index
            if not 0 <= idx < n:
                raise IndexGapError(
                    f"item index {idx} outside 0..{n - 1}; indexes must cover that range exactly"
                )
            if seen[idx]:
                raise DuplicateIndexError(idx)
            seen[idx] = True
            person[idx] = rec.person_id
            camera[idx] = rec.camera_id
            query[idx] = rec.role is Role.QUERY
        # seen is all-True here: n records, unique, each within range
        return cls(person_ids=person, camera_ids=camera, is_query=query)

    @property
    def n_items(self) -> int:
        return len(self.person_ids)

    @property
    def query_indices(self) -> np.ndarray:
        return np.flatnonzero(self.is_query)

    @property
    def gallery_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.is_query)

    def records(self) -> Iterator[EvalRecord]:
        for i in range(self.n_items):
            yield EvalRecord(
                item_index=i,
                person_id=int(self.person_ids[i]),
                camera_id=int(self.camera_ids[i]),
                role=Role.QUERY if self.is_query[i] else Role.GALLERY,
            )


@dataclass(frozen=True)
class RankListMatrix:
    """Self-inclusive neighbor orderings plus the inverse position map.

    order[i, r] is the item at 1-based rank r+1 of item i's list; pos[i, b]
    is the 1-based position of item b in that list, so
    pos[i, order[i, r]] == r + 1 and order[i, 0] == i.
    """

    order: np.ndarray  # int32 (n, n)
    pos: np.ndarray  # int32 (n, n)

    @property
    def n_items(self) -> int:
        return self.order.shape[0]


@dataclass(frozen=True)
class ExpandedNeighborTable:
    """Two-level neighbor multiset per item: the top t picks followed by
    each pick's own top q picks, in list order, duplicates kept."""

    neighbors: np.ndarray  # int32 (n, t + t*q)
    t: int
    q: int

    @property
    def m(self) -> int:
        return self.t + self.t * self.q

    @property
    def n_items(self) -> int:
        return self.neighbors.shape[0]


def validate_feature_matrix(features: np.ndarray) -> None:
    """Check the feature-matrix contract, raising on the first violation."""
    a = np.asarray(features)
    if a.ndim != 2:
        raise ShapeMismatchError(f"feature matrix must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise EmptyMatrixError(f"feature matrix must be at least 1x1, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.floating) and not np.issubdtype(a.dtype, np.integer):
        raise ShapeMismatchError(f"feature matrix must be numeric, got dtype {a.dtype}")
    finite = np.isfinite(a)
    if not finite.all():
        raise NonFiniteError(int(np.flatnonzero(~finite.ravel())[0]), context="feature matrix")
