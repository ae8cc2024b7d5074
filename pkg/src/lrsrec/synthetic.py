"""Seeded generators for planted low-rank + sparse instances.

Every generator is a pure function of its seed; ground truth is retained so
experiments can score recovery exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ParameterError
from .models import RpcaProblem, SensingProblem
from .numerics import as_matrix

__all__ = [
    "GroundTruth",
    "gen_lowrank",
    "gen_sparse",
    "gen_sensing",
    "gen_rpca",
    "make_ground_truth",
]

Seed = Union[int, np.random.SeedSequence, np.random.Generator]


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class GroundTruth:
    """Planted pair (X*, S*) plus the measured quantities solvers are given."""

    x_star: np.ndarray
    s_star: np.ndarray
    sigma1: float
    sigma_r: float
    alpha_actual: float
    r: int
    s_count: int
    beta: float


def gen_lowrank(
    d1: int, d2: int, r: int, seed: Seed
) -> tuple[np.ndarray, float, float, float]:
    """X* = U V^T with i.i.d. standard normal factor entries.

    Returns (x_star, sigma1, sigma_r, alpha_actual) where alpha_actual is the
    measured incoherence max(d1 * ||row(Ubar)||^2, d2 * ||row(Vbar)||^2) / r
    of the top-r singular subspaces.
    """
    if not 1 <= r <= min(d1, d2):
        raise ParameterError(f"r={r} out of range [1, {min(d1, d2)}]")
    rng = _rng(seed)
    u = rng.standard_normal((d1, r))
    v = rng.standard_normal((d2, r))
    x = u @ v.T
    lu, sv, rvt = np.linalg.svd(x, full_matrices=False)
    ubar, vbar = lu[:, :r], rvt[:r, :].T
    alpha = max(
        d1 * float(np.max(np.sum(ubar * ubar, axis=1))),
        d2 * float(np.max(np.sum(vbar * vbar, axis=1))),
    ) / r
    return x, float(sv[0]), float(sv[r - 1]), alpha


def gen_sparse(
    d1: int, d2: int, beta: float, value_range_alpha: float, seed: Seed
) -> np.ndarray:
    """Sparse corruption: each entry nonzero with probability beta, values
    uniform on [-a, a] with a = value_range_alpha.

    After sampling, rows and columns are repaired to at most ceil(1.5*beta*d)
    nonzeros (excess entries zeroed at random, seeded) so the per-row/column
    sparsity class assumed by the solver holds.
    """
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must be in (0, 1), got {beta}")
    if value_range_alpha < 0:
        raise ParameterError(f"value range must be >= 0, got {value_range_alpha}")
    rng = _rng(seed)
    support = rng.random((d1, d2)) < beta
    values = rng.uniform(-value_range_alpha, value_range_alpha, size=(d1, d2))
    s = np.where(support, values, 0.0)

    cap_row = math.ceil(1.5 * beta * d2)
    cap_col = math.ceil(1.5 * beta * d1)
    for i in range(d1):
        idx = np.flatnonzero(s[i, :])
        if idx.size > cap_row:
            drop = rng.choice(idx, size=idx.size - cap_row, replace=False)
            s[i, drop] = 0.0
    for j in range(d2):
        idx = np.flatnonzero(s[:, j])
        if idx.size > cap_col:
            drop = rng.choice(idx, size=idx.size - cap_col, replace=False)
            s[drop, j] = 0.0
    return s


def gen_sensing(
    x_star: np.ndarray,
    s_star: np.ndarray,
    n: int,
    noise_nu: float,
    seed: Seed,
) -> SensingProblem:
    """n i.i.d. standard normal sensing matrices; y_i = <A_i, X*+S*> + eps_i
    with eps_i ~ N(0, nu^2). nu = 0 is the noiseless case."""
    x = as_matrix(x_star, "x_star")
    s = as_matrix(s_star, "s_star")
    if x.shape != s.shape:
        raise ParameterError(f"x_star shape {x.shape} != s_star shape {s.shape}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if noise_nu < 0:
        raise ParameterError(f"noise_nu must be >= 0, got {noise_nu}")
    rng = _rng(seed)
    d1, d2 = x.shape
    a = rng.standard_normal((n, d1, d2))
    y = a.reshape(n, -1) @ (x + s).ravel()
    if noise_nu > 0:
        y = y + rng.normal(0.0, noise_nu, size=n)
    return SensingProblem(matrices=a, measurements=y)


def gen_rpca(
    x_star: np.ndarray,
    s_star: np.ndarray,
    p: float,
    noise_nu: float,
    seed: Seed,
) -> RpcaProblem:
    """Entrywise observation of X* + S* + E on an i.i.d. Bernoulli(p) mask,
    E ~ N(0, nu^2/(d1*d2)) per cell; the stored rate is the empirical mask
    fraction (exactly 1 with an all-true mask when p = 1)."""
    x = as_matrix(x_star, "x_star")
    s = as_matrix(s_star, "s_star")
    if x.shape != s.shape:
        raise ParameterError(f"x_star shape {x.shape} != s_star shape {s.shape}")
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"p must be in (0, 1], got {p}")
    if noise_nu < 0:
        raise ParameterError(f"noise_nu must be >= 0, got {noise_nu}")
    rng = _rng(seed)
    d1, d2 = x.shape
    if p >= 1.0:
        mask = np.ones((d1, d2), dtype=bool)
    else:
        mask = rng.random((d1, d2)) < p
    if not mask.any():
        raise ParameterError(f"empty observation mask at p={p}; increase p or dims")
    total = x + s
    if noise_nu > 0:
        total = total + rng.normal(0.0, noise_nu / math.sqrt(d1 * d2), size=(d1, d2))
    observed = np.where(mask, total, 0.0)
    return RpcaProblem(observed=observed, mask=mask, p=float(mask.mean()))


def make_ground_truth(
    d1: int,
    d2: int,
    r: int,
    beta: float,
    amplitude: float,
    seed: Union[int, np.random.SeedSequence],
    s_count: Optional[int] = None,
) -> GroundTruth:
    """Plant X* and S* from independent sub-streams of *seed* and bundle them
    with the measured scale/incoherence values. s_count defaults to nnz(S*)."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    low_seed, sparse_seed = ss.spawn(2)
    x, sigma1, sigma_r, alpha = gen_lowrank(d1, d2, r, low_seed)
    s = gen_sparse(d1, d2, beta, amplitude, sparse_seed)
    nnz = int(np.count_nonzero(s))
    return GroundTruth(
        x_star=x,
        s_star=s,
        sigma1=sigma1,
        sigma_r=sigma_r,
        alpha_actual=alpha,
        r=r,
        s_count=nnz if s_count is None else s_count,
        beta=beta,
    )
