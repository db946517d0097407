"""Retrieval re-ranking through expanded cross neighborhoods, with
single-query CMC/mAP evaluation, bit-exact file formats, and a synthetic
verification harness."""

from . import errors
from .core import (
    EcnParams,
    EvalRecord,
    EvalRecords,
    ExpandedNeighborTable,
    Method,
    RankListMatrix,
    Role,
    validate_feature_matrix,
)
from .distance import pairwise_cosine, pairwise_sq_euclidean
from .ecn import ecn_distance, rank_dist, rank_list_similarity, rerank
from .evaluation import EvalReport, evaluate, read_report, write_report
from .fileio import (
    read_distance,
    read_features,
    read_metadata,
    write_distance,
    write_features,
    write_metadata,
)
from .ranking import build_rank_lists, expand_neighbors
from .synth import ORACLE_MAX_ITEMS, generate_clusters, oracle_all_methods, oracle_ecn

__version__ = "0.1.0"

__all__ = [
    "EcnParams",
    "EvalRecord",
    "EvalRecords",
    "EvalReport",
    "ExpandedNeighborTable",
    "Method",
    "ORACLE_MAX_ITEMS",
    "RankListMatrix",
    "Role",
    "build_rank_lists",
    "ecn_distance",
    "errors",
    "evaluate",
    "expand_neighbors",
    "generate_clusters",
    "oracle_all_methods",
    "oracle_ecn",
    "pairwise_cosine",
    "pairwise_sq_euclidean",
    "rank_dist",
    "rank_list_similarity",
    "read_distance",
    "read_features",
    "read_metadata",
    "read_report",
    "rerank",
    "validate_feature_matrix",
    "write_distance",
    "write_features",
    "write_metadata",
    "write_report",
]
