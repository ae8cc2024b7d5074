"""Recovery metrics: rotation-optimal factor distance, combined error,
relative error, RMSE, and incoherence measurement."""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .numerics import FactorPair, as_matrix, procrustes_rotation, svd_top_k
from .synthetic import GroundTruth

__all__ = [
    "truth_factors",
    "factor_distance",
    "combined_error",
    "relative_error",
    "rmse",
    "measure_incoherence",
]


def truth_factors(truth: GroundTruth) -> FactorPair:
    """Reference factors (U*, V*) = (Ubar sqrt(Sigma), Vbar sqrt(Sigma)) from
    the rank-r SVD of X*: the balanced split every distance is measured against."""
    res = svd_top_k(truth.x_star, truth.r)
    root = np.sqrt(res.singular_values)
    return FactorPair(u=res.left * root, v=res.right * root)


def factor_distance(z: FactorPair, z_star: FactorPair) -> float:
    """min over orthonormal R of ||[U;V] - [U*;V*] R||_F."""
    a = z.stacked
    b = z_star.stacked
    rot = procrustes_rotation(a, b)
    return float(np.linalg.norm(a - b @ rot))


def combined_error(z: FactorPair, s: np.ndarray, truth: GroundTruth) -> float:
    """Squared factor distance plus ||S - S*||_F^2 / sigma1."""
    if truth.sigma1 <= 0:
        raise ParameterError(f"truth.sigma1 must be > 0, got {truth.sigma1}")
    d = factor_distance(z, truth_factors(truth))
    diff = as_matrix(s, "s") - truth.s_star
    return d * d + float(np.sum(diff * diff)) / truth.sigma1


def relative_error(x_hat: np.ndarray, x_star: np.ndarray) -> float:
    """||x_hat - x_star||_F / ||x_star||_F."""
    a = as_matrix(x_hat, "x_hat")
    b = as_matrix(x_star, "x_star")
    denom = float(np.linalg.norm(b))
    if denom == 0.0:
        raise ParameterError("relative_error undefined for zero x_star")
    return float(np.linalg.norm(a - b)) / denom


def rmse(x_hat: np.ndarray, x_star: np.ndarray) -> float:
    """||x_hat - x_star||_F / sqrt(d1 * d2)."""
    a = as_matrix(x_hat, "x_hat")
    b = as_matrix(x_star, "x_star")
    d1, d2 = b.shape
    return float(np.linalg.norm(a - b)) / math.sqrt(d1 * d2)


def measure_incoherence(x: np.ndarray, r: int) -> float:
    """Incoherence of the top-r singular subspaces of x:
    max(d1 * max row norm^2 of Ubar, d2 * max row norm^2 of Vbar) / r. Always >= 1."""
    res = svd_top_k(x, r)
    d1, d2 = as_matrix(x).shape
    return max(
        d1 * float(np.max(np.sum(res.left * res.left, axis=1))),
        d2 * float(np.max(np.sum(res.right * res.right, axis=1))),
    ) / r
