"""Single-query cross-camera retrieval metrics: CMC rank scores and mAP.

Protocol, per query: gallery items sharing both the query's identity and
camera are dropped from the ranking entirely; items carrying a distractor
identity label (0 or -1) stay in the ranking but never count as relevant;
what remains is sorted by ascending distance with ties broken by item
index. A query with no relevant item left is skipped and counted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import EvalRecords
from .errors import BadParamsError, NoValidQueriesError, ShapeMismatchError

DISTRACTOR_IDS = (0, -1)


@dataclass(frozen=True)
class EvalReport:
    map: float
    cmc: dict[int, float]
    num_queries: int
    skipped_queries: int
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "map": self.map,
            "cmc": {str(k): v for k, v in sorted(self.cmc.items())},
            "num_queries": self.num_queries,
            "skipped_queries": self.skipped_queries,
            "params": self.params,
        }


def evaluate(
    dist: np.ndarray,
    records: EvalRecords,
    ranks: Sequence[int] = (1, 5, 10, 50),
    params: dict | None = None,
) -> EvalReport:
    """Score a query x gallery distance matrix against labeled records.

    Rows must follow query item indexes ascending, columns gallery item
    indexes ascending (the layout `rerank` produces). mAP averages, over
    valid queries, the mean precision at each relevant item's rank; the
    CMC value at k is the fraction of valid queries whose first relevant
    item appears within the top k.
    """
    ranks = [int(k) for k in ranks]
    if not ranks or any(k < 1 for k in ranks):
        raise BadParamsError(f"ranks must be positive, got {ranks}")
    d = np.asarray(dist, dtype=np.float64)
    q_idx = records.query_indices
    g_idx = records.gallery_indices
    if d.ndim != 2 or d.shape != (q_idx.size, g_idx.size):
        raise ShapeMismatchError(
            f"distance matrix shape {d.shape} does not match "
            f"{q_idx.size} queries x {g_idx.size} gallery items"
        )
    g_pid = records.person_ids[g_idx]
    g_cam = records.camera_ids[g_idx]
    g_distractor = np.isin(g_pid, DISTRACTOR_IDS)

    aps: list[float] = []
    first_hit_ranks: list[int] = []
    skipped = 0
    for qi in range(q_idx.size):
        q_pid = records.person_ids[q_idx[qi]]
        q_cam = records.camera_ids[q_idx[qi]]
        order = np.argsort(d[qi], kind="stable")
        junk = (g_pid == q_pid) & (g_cam == q_cam)
        keep = ~junk[order]
        relevant = ((g_pid == q_pid) & (g_cam != q_cam) & ~g_distractor)[order][keep]
        hits = np.flatnonzero(relevant)
        if hits.size == 0:
            skipped += 1
            continue
        precision_at_hits = np.arange(1, hits.size + 1, dtype=np.float64) / (hits + 1)
        aps.append(float(precision_at_hits.mean()))
        first_hit_ranks.append(int(hits[0]) + 1)

    if not aps:
        raise NoValidQueriesError("no query has a relevant gallery item after filtering")
    firsts = np.asarray(first_hit_ranks)
    cmc = {k: float(np.mean(firsts <= k)) for k in ranks}
    return EvalReport(
        map=float(np.mean(aps)),
        cmc=cmc,
        num_queries=len(aps),
        skipped_queries=skipped,
        params=dict(params or {}),
    )


def write_report(report: EvalReport, path) -> None:
    """Serialize a report as the UTF-8 JSON document consumers expect."""
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
