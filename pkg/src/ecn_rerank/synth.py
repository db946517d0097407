"""Synthetic clustered datasets and a brute-force reference pipeline.

The generator draws one Gaussian cluster center per identity and scatters
that identity's images around it, so retrieval difficulty is a single
knob: the intra/inter standard-deviation ratio. Randomness comes from
numpy's PCG64 generator, whose bit stream is fixed by the seed and stable
across platforms, making fixtures reproducible everywhere.

The oracle re-implements the whole re-ranking computation with explicit
Python loops and list sorts, sharing no code with the fast path; it is
deliberately slow and refuses unions beyond ORACLE_MAX_ITEMS.
"""

from __future__ import annotations

import numpy as np

from .core import EcnParams, EvalRecords, Method
from .errors import (
    BadParamsError,
    DegenerateSimilarityError,
    ParamsTooLargeError,
    TooLargeForOracleError,
)

ORACLE_MAX_ITEMS = 500


def generate_clusters(
    seed: int,
    n_ids: int,
    imgs_per_id: int,
    dim: int,
    intra_std: float,
    inter_std: float,
    n_cameras: int,
) -> tuple[np.ndarray, EvalRecords]:
    """Gaussian identity clusters with camera labels and query roles.

    Cluster centers are isotropic normal with scale inter_std; each image
    adds isotropic noise with scale intra_std. Cameras rotate round-robin
    over items, and the first image of every identity is the query, which
    the rotation guarantees shares no camera with at least one gallery
    image of the same identity. Items are identity-major, person ids
    start at 1 so no synthetic item collides with distractor labels.
    """
    if n_ids < 1:
        raise BadParamsError(f"n_ids must be >= 1, got {n_ids}")
    if imgs_per_id < 2:
        raise BadParamsError(
            f"imgs_per_id must be >= 2 so each query has a same-id gallery image, got {imgs_per_id}"
        )
    if dim < 1:
        raise BadParamsError(f"dim must be >= 1, got {dim}")
    if n_cameras < 2:
        raise BadParamsError(f"n_cameras must be >= 2, got {n_cameras}")
    if intra_std < 0 or inter_std < 0:
        raise BadParamsError("intra_std and inter_std must be non-negative")

    rng = np.random.Generator(np.random.PCG64(seed))
    n = n_ids * imgs_per_id
    centers = rng.standard_normal((n_ids, dim)) * inter_std
    noise = rng.standard_normal((n, dim)) * intra_std
    features = (np.repeat(centers, imgs_per_id, axis=0) + noise).astype(np.float32)

    person_ids = np.repeat(np.arange(1, n_ids + 1, dtype=np.int64), imgs_per_id)
    camera_ids = np.arange(n, dtype=np.int64) % n_cameras
    is_query = np.zeros(n, dtype=bool)
    is_query[np.arange(n_ids) * imgs_per_id] = True
    records = EvalRecords(person_ids=person_ids, camera_ids=camera_ids, is_query=is_query)
    return features, records


def oracle_all_methods(
    features: np.ndarray, records: EvalRecords, t: int, q: int, k: int
) -> dict[Method, np.ndarray]:
    """Brute-force all three re-ranking variants in one pass.

    Returns {RANK_DIST, ECN_ORIG, ECN_RANK} -> query x gallery matrix.
    """
    feats = np.asarray(features, dtype=np.float64)
    n = feats.shape[0]
    if n > ORACLE_MAX_ITEMS:
        raise TooLargeForOracleError(
            f"oracle handles at most {ORACLE_MAX_ITEMS} items, got {n}"
        )
    if t < 1 or q < 0 or k < 1:
        raise BadParamsError(f"need t >= 1, q >= 0, k >= 1, got t={t}, q={q}, k={k}")
    m = t + t * q
    if m > n or t + 1 > n:
        raise ParamsTooLargeError(
            f"t={t}, q={q} needs t + t*q <= n_items and t < n_items, got n_items={n}"
        )

    rows = [[float(v) for v in row] for row in feats]
    dist = [[0.0] * n for _ in range(n)]
    for i in range(n):
        ri = rows[i]
        for j in range(i + 1, n):
            rj = rows[j]
            s = 0.0
            for a, b in zip(ri, rj):
                diff = a - b
                s += diff * diff
            dist[i][j] = s
            dist[j][i] = s

    # self-first rank lists, remaining ties by ascending index
    orders = []
    for i in range(n):
        di = dist[i]
        rest = sorted((b for b in range(n) if b != i), key=lambda b: (di[b], b))
        orders.append([i] + rest)
    positions = [[0] * n for _ in range(n)]
    for i, li in enumerate(orders):
        for r, b in enumerate(li):
            positions[i][b] = r + 1

    # expanded neighbor multisets: top t picks, then each pick's top q picks
    expanded = []
    for i in range(n):
        firsts = orders[i][1 : t + 1]
        row = list(firsts)
        for f_idx in firsts:
            row.extend(orders[f_idx][1 : q + 1])
        expanded.append(row)

    # weighted overlap of top-k prefixes, summed over every item b
    weight_rows = [
        [float(max(k + 1 - positions[i][b], 0)) for b in range(n)] for i in range(n)
    ]
    sim = [[0.0] * n for _ in range(n)]
    for i in range(n):
        wi = weight_rows[i]
        for j in range(i, n):
            wj = weight_rows[j]
            s = 0.0
            for b in range(n):
                s += wi[b] * wj[b]
            sim[i][j] = s
            sim[j][i] = s
    smin = min(min(row) for row in sim)
    smax = max(max(row) for row in sim)
    if smax == smin:
        raise DegenerateSimilarityError("all similarity entries are equal")
    drank = [[1.0 - (v - smin) / (smax - smin) for v in row] for row in sim]

    q_idx = [int(i) for i in records.query_indices]
    g_idx = [int(i) for i in records.gallery_indices]

    def aggregate(base):
        out = np.empty((len(q_idx), len(g_idx)), dtype=np.float64)
        for a, p in enumerate(q_idx):
            pn = expanded[p]
            for c, g in enumerate(g_idx):
                gn = expanded[g]
                acc = 0.0
                for j in range(m):
                    acc += base[pn[j]][g]
                    acc += base[gn[j]][p]
                out[a, c] = acc / (2.0 * m)
        return out

    sliced_rank = np.array([[drank[p][g] for g in g_idx] for p in q_idx], dtype=np.float64)
    return {
        Method.RANK_DIST: sliced_rank,
        Method.ECN_ORIG: aggregate(dist),
        Method.ECN_RANK: aggregate(drank),
    }


def oracle_ecn(features: np.ndarray, records: EvalRecords, params: EcnParams) -> np.ndarray:
    """Brute-force re-ranked distances for one method (see oracle_all_methods)."""
    if params.method is Method.NONE:
        raise BadParamsError("oracle covers rank-dist, ecn-orig, and ecn-rank only")
    return oracle_all_methods(features, records, params.t, params.q, params.k)[params.method]
