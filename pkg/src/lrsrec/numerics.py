"""Dense-matrix numerics: truncated SVD, spectral norm, Procrustes rotation.

Matrices are plain 2-D float64 numpy arrays (row-major). Every public
operation validates its inputs and guarantees finite outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError

__all__ = [
    "as_matrix",
    "SvdResult",
    "svd_top_k",
    "spectral_norm",
    "procrustes_rotation",
    "FactorPair",
]


def as_matrix(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate *m* as a finite 2-D float array and return it as float64."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.size == 0:
        raise DimensionError(f"{name} must be nonempty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class SvdResult:
    """Top-k singular triplets: left (d1,k), values (k,) nonincreasing, right (d2,k)."""

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return self.singular_values.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Best rank-k approximation left @ diag(sigma) @ right.T."""
        return (self.left * self.singular_values) @ self.right.T


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Reproducibility convention: largest-magnitude entry of each left vector
    # is made positive (ties resolved by np.argmax = lowest index); the sign
    # flip is propagated to the matching right vector.
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            vt[j, :] = -vt[j, :]
    return u, vt


def svd_top_k(m: np.ndarray, k: int) -> SvdResult:
    """Rank-k SVD of *m*: the k largest singular triplets, sign-normalized.

    Raises DimensionError unless 1 <= k <= min(m.shape); numerical failures
    of the backend surface as NumericalError (never silent garbage).
    """
    a = as_matrix(m)
    if not 1 <= k <= min(a.shape):
        raise DimensionError(f"k={k} out of range [1, {min(a.shape)}] for shape {a.shape}")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc
    u, vt = _fix_signs(u[:, :k].copy(), vt[:k, :].copy())
    return SvdResult(left=u, singular_values=s[:k].copy(), right=vt.T.copy())


def spectral_norm(m: np.ndarray) -> float:
    """Largest singular value of *m*."""
    a = as_matrix(m)
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc
    return float(s[0])


def procrustes_rotation(z: np.ndarray, z_star: np.ndarray) -> np.ndarray:
    """Orthonormal r-by-r R minimizing ||z - z_star @ R||_F.

    R is the polar factor of z_star.T @ z. A rank-deficient product still
    yields a valid minimizer (the SVD completes the null directions).
    """
    a = as_matrix(z, "z")
    b = as_matrix(z_star, "z_star")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: z {a.shape} vs z_star {b.shape}")
    try:
        u, _, vt = np.linalg.svd(b.T @ a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc
    return u @ vt


@dataclass(frozen=True)
class FactorPair:
    """Factored iterate (U, V) with X = U @ V.T and stacked Z = [U; V]."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        u = as_matrix(self.u, "u")
        v = as_matrix(self.v, "v")
        if u.shape[1] != v.shape[1]:
            raise DimensionError(
                f"u and v must share a column count, got {u.shape[1]} and {v.shape[1]}"
            )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def r(self) -> int:
        return self.u.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        """Z = [U; V], shape (d1 + d2, r)."""
        return np.vstack([self.u, self.v])

    def product(self) -> np.ndarray:
        """X = U @ V.T."""
        return self.u @ self.v.T
