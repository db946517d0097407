"""Pairwise distances over the union of query and gallery items."""

from __future__ import annotations

import numpy as np

from ._kernels import sq_euclidean_from_gram
from .core import validate_feature_matrix
from .errors import ZeroNormRowError


def pairwise_sq_euclidean(features: np.ndarray, threads: int = 1) -> np.ndarray:
    """Squared euclidean distance between every pair of rows.

    Computed in float64 through the |x|^2 + |y|^2 - 2 x.y expansion;
    cancellation noise is clamped, and the cross term is symmetrized so
    the output is exactly symmetric, non-negative, zero on the diagonal.
    """
    validate_feature_matrix(features)
    x = np.asarray(features, dtype=np.float64)
    sq = np.einsum("ij,ij->i", x, x)
    return sq_euclidean_from_gram(x @ x.T, sq, threads)


def pairwise_cosine(features: np.ndarray) -> np.ndarray:
    """Cosine distance 1 - cos(x_i, x_j), clamped to [0, 2].

    Raises ZeroNormRowError for any all-zero row; the angle to such a
    vector is undefined.
    """
    validate_feature_matrix(features)
    x = np.asarray(features, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroNormRowError(int(zero[0]))
    xn = x / norms[:, None]
    d = 1.0 - xn @ xn.T
    d = 0.5 * (d + d.T)
    np.clip(d, 0.0, 2.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d
