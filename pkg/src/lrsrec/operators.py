"""Structured thresholding and projection operators.

All operators are pure: they validate, allocate a fresh output, and never
mutate their inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .numerics import as_matrix, svd_top_k

__all__ = [
    "hard_threshold",
    "truncate",
    "double_threshold",
    "project_row_norm",
    "rank_project_clipped",
]


def hard_threshold(s: np.ndarray, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries of *s*, zero the rest.

    Ties at the cut are broken deterministically: smaller row index first,
    then smaller column index. k = 0 gives the zero matrix; k >= s.size
    returns a copy of s.
    """
    a = as_matrix(s)
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}")
    if k == 0:
        return np.zeros_like(a)
    if k >= a.size:
        return a.copy()
    flat = np.abs(a).ravel()
    # Stable sort on -|s| keeps the original row-major order among equal
    # magnitudes, which is exactly the row-then-column tie rule.
    order = np.argsort(-flat, kind="stable")[:k]
    out = np.zeros_like(a)
    out.ravel()[order] = a.ravel()[order]
    return out


def truncate(s: np.ndarray, theta: float) -> np.ndarray:
    """Zero every entry that is not simultaneously among the top ceil(theta*d2)
    magnitudes of its row and the top ceil(theta*d1) magnitudes of its column.

    The comparison is inclusive (>=), so magnitude ties may keep extra
    entries. theta must lie in (0, 1]; theta = 1 is the identity.
    """
    a = as_matrix(s)
    if not 0.0 < theta <= 1.0:
        raise ParameterError(f"theta must be in (0, 1], got {theta}")
    d1, d2 = a.shape
    k_row = math.ceil(theta * d2)
    k_col = math.ceil(theta * d1)
    mag = np.abs(a)
    # (d2 - k_row)-th ascending order statistic = k_row-th largest per row.
    row_cut = np.partition(mag, d2 - k_row, axis=1)[:, d2 - k_row]
    col_cut = np.partition(mag, d1 - k_col, axis=0)[d1 - k_col, :]
    keep = (mag >= row_cut[:, None]) & (mag >= col_cut[None, :])
    return np.where(keep, a, 0.0)


def double_threshold(
    s: np.ndarray,
    gamma: float,
    gamma_prime: float,
    s_count: int,
    beta: float,
) -> np.ndarray:
    """Sparse-update operator: hard threshold to floor(gamma_prime * s_count)
    entries, then row/column truncation with fraction theta = gamma * beta.

    s_count = 0 is allowed and yields the zero matrix.
    """
    if gamma <= 1.0:
        raise ParameterError(f"gamma must be > 1, got {gamma}")
    if gamma_prime <= 1.0:
        raise ParameterError(f"gamma_prime must be > 1, got {gamma_prime}")
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must be in (0, 1), got {beta}")
    if gamma * beta > 1.0:
        raise ParameterError(f"gamma * beta must be <= 1, got {gamma * beta}")
    if s_count < 0:
        raise ParameterError(f"s_count must be >= 0, got {s_count}")
    k = math.floor(gamma_prime * s_count)
    return truncate(hard_threshold(s, k), gamma * beta)


def project_row_norm(m: np.ndarray, bound: float) -> np.ndarray:
    """Euclidean projection onto {rows with l2 norm <= bound}: rows within the
    bound pass through unchanged, others are rescaled to norm exactly bound.
    """
    a = as_matrix(m)
    if bound < 0:
        raise ParameterError(f"bound must be >= 0, got {bound}")
    norms = np.linalg.norm(a, axis=1)
    out = a.copy()
    over = norms > bound
    if np.any(over):
        out[over] *= (bound / norms[over])[:, None]
    return out


def rank_project_clipped(m: np.ndarray, k: int, zeta: float) -> np.ndarray:
    """One alternating-projection step toward {rank <= k} ∩ {|entries| <= zeta}:
    best rank-k approximation first, then entrywise clipping to [-zeta, zeta].

    The infinity-norm constraint holds exactly on output; the rank may exceed
    k after clipping (accepted one-step relaxation).
    """
    if zeta <= 0:
        raise ParameterError(f"zeta must be > 0, got {zeta}")
    recon = svd_top_k(m, k).reconstruct()
    return np.clip(recon, -zeta, zeta)
