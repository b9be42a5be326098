"""Dense similarity kernels shared by dictionary induction and retrieval."""

import numpy as np


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm; zero rows stay zero (score 0 everywhere)."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


def cosine_matrix(queries: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities, queries as rows."""
    return unit_rows(queries) @ unit_rows(targets).T


def topk_mean(scores: np.ndarray, k: int, axis: int) -> np.ndarray:
    """Mean of the k largest entries along an axis."""
    k = min(k, scores.shape[axis])
    part = np.partition(scores, scores.shape[axis] - k, axis=axis)
    sl = [slice(None)] * scores.ndim
    sl[axis] = slice(scores.shape[axis] - k, None)
    return part[tuple(sl)].mean(axis=axis)


def csls_matrix(cos: np.ndarray, k: int = 10) -> np.ndarray:
    """Hubness-corrected scores: 2*cos(x,y) - r_T(x) - r_S(y).

    r_T(x) is the mean cosine of x's k nearest target neighbors and r_S(y)
    the mean cosine of y's k nearest source neighbors, both read off the
    full cosine matrix.
    """
    r_tgt = topk_mean(cos, k, axis=1)
    r_src = topk_mean(cos, k, axis=0)
    return 2.0 * cos - r_tgt[:, None] - r_src[None, :]
