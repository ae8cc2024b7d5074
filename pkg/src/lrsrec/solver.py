"""Two-phase solver for low-rank plus sparse recovery.

Phase one (``init_phase``) alternates a hard-thresholded sparse step with a
clipped rank projection on the unfactored matrix, then factors the result.
Phase two (``gd_phase``) runs projected gradient descent on the factors
(U, V) jointly with a double-thresholded sparse update. ``solve`` chains the
two and concatenates their traces.

The solver is fully deterministic: no randomness is consumed anywhere, so a
fixed model and configuration reproduce the iterate sequence exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError, NumericalError, ParameterError
from .metrics import factor_distance, truth_factors
from .models import ObservationModel, grad, loss, objective_f
from .numerics import FactorPair, as_matrix, spectral_norm, svd_top_k
from .operators import double_threshold, hard_threshold, project_row_norm, rank_project_clipped
from .synthetic import GroundTruth

__all__ = [
    "SolverConfig",
    "InitConfig",
    "FactorPair",
    "TraceRecord",
    "RunTrace",
    "Solution",
    "init_phase",
    "gd_phase",
    "solve",
]

# Objective window for the relative-change early stop.
_STOP_WINDOW = 5


@dataclass
class SolverConfig:
    """Tunables of the gradient descent phase.

    r, s_count, beta, alpha describe the planted structure (rank, sparsity
    budget, per-row/column corruption fraction, incoherence) and are inputs,
    not estimated. The factor step is eta = eta_coeff / sigma1_hat with
    sigma1_hat = ||Z0||_2^2 / 2; tau is the absolute sparse step. tol <= 0
    disables early stopping; otherwise the run stops once the best objective
    has not improved by a relative factor of tol for 5 consecutive iterations
    (at the floating-point floor the objective only jitters, so a plain
    change test would never fire).
    """

    r: int
    s_count: int
    beta: float
    alpha: float
    gamma: float = 2.0
    gamma_prime: float = 2.0
    eta_coeff: float = 0.5
    tau: float = 0.5
    max_iters: int = 500
    tol: float = 1e-10
    seed: int = 0

    def validate(self) -> None:
        if self.r < 1:
            raise ParameterError(f"r must be >= 1, got {self.r}")
        if self.s_count < 0:
            raise ParameterError(f"s_count must be >= 0, got {self.s_count}")
        if not 0.0 < self.beta < 1.0:
            raise ParameterError(f"beta must be in (0, 1), got {self.beta}")
        if self.alpha < 1.0:
            raise ParameterError(f"alpha must be >= 1, got {self.alpha}")
        if self.gamma <= 1.0:
            raise ParameterError(f"gamma must be > 1, got {self.gamma}")
        if self.gamma_prime <= 1.0:
            raise ParameterError(f"gamma_prime must be > 1, got {self.gamma_prime}")
        if self.gamma * self.beta > 1.0:
            raise ParameterError(
                f"gamma * beta must be <= 1, got {self.gamma * self.beta}"
            )
        if self.eta_coeff <= 0:
            raise ParameterError(f"eta_coeff must be > 0, got {self.eta_coeff}")
        if self.tau <= 0:
            raise ParameterError(f"tau must be > 0, got {self.tau}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol >= 1.0:
            raise ParameterError(f"tol must be < 1, got {self.tol}")


@dataclass
class InitConfig:
    """Tunables of the initialization phase.

    lam scales the sparse budget (hard threshold keeps floor(lam * s_count)
    entries); lam_prime scales the projection rank (k = ceil(lam_prime * r)).
    eta_prime / tau_prime are absolute step sizes. The clip level is
    recomputed per iteration as zeta_coeff * alpha * r * sigma1_hat / sqrt(d1*d2)
    with sigma1_hat the spectral norm of the pre-projection candidate.
    kappa_hint is carried for config transparency only; it cancels out of the
    clip level and has no effect.
    """

    lam: float = 2.0
    lam_prime: float = 1.0
    eta_prime: float = 0.5
    tau_prime: float = 0.5
    init_iters: int = 10
    zeta_coeff: float = 1.5
    kappa_hint: Optional[float] = None

    def validate(self) -> None:
        if self.lam <= 1.0:
            raise ParameterError(f"lam must be > 1, got {self.lam}")
        if self.lam_prime < 1.0:
            raise ParameterError(f"lam_prime must be >= 1, got {self.lam_prime}")
        if self.eta_prime <= 0:
            raise ParameterError(f"eta_prime must be > 0, got {self.eta_prime}")
        if self.tau_prime <= 0:
            raise ParameterError(f"tau_prime must be > 0, got {self.tau_prime}")
        if self.init_iters < 1:
            raise ParameterError(f"init_iters must be >= 1, got {self.init_iters}")
        if self.zeta_coeff <= 0:
            raise ParameterError(f"zeta_coeff must be > 0, got {self.zeta_coeff}")
        if self.kappa_hint is not None and self.kappa_hint <= 0:
            raise ParameterError(f"kappa_hint must be > 0, got {self.kappa_hint}")


@dataclass
class TraceRecord:
    """One per-iteration measurement; truth fields are None when unknown."""

    iteration: int
    phase: str  # "init" | "gd"
    objective: float
    rel_err_x: Optional[float]
    rel_err_s: Optional[float]
    d2_z: Optional[float]
    d_zs: Optional[float]
    secs: float


@dataclass
class RunTrace:
    """Ordered per-iteration records; iteration indices strictly increase from 0."""

    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def phase_records(self, phase: str) -> list[TraceRecord]:
        return [rec for rec in self.records if rec.phase == phase]

    def column(self, name: str, phase: Optional[str] = None) -> np.ndarray:
        """Column as a float array; missing truth values come out as NaN."""
        recs = self.records if phase is None else self.phase_records(phase)
        vals = [getattr(rec, name) for rec in recs]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)


@dataclass
class Solution:
    """Final iterate triple plus the materialized product and the run trace."""

    factors: FactorPair
    sparse: np.ndarray
    x_hat: np.ndarray
    trace: RunTrace


class _TruthScorer:
    """Precomputed reference quantities for per-iteration error columns."""

    def __init__(self, truth: GroundTruth):
        self.truth = truth
        self.z_star = truth_factors(truth)
        self.x_norm = float(np.linalg.norm(truth.x_star))
        self.s_norm = float(np.linalg.norm(truth.s_star))

    def matrix_errors(self, x: np.ndarray, s: np.ndarray) -> tuple[Optional[float], Optional[float]]:
        rel_x = float(np.linalg.norm(x - self.truth.x_star)) / self.x_norm if self.x_norm > 0 else None
        rel_s = float(np.linalg.norm(s - self.truth.s_star)) / self.s_norm if self.s_norm > 0 else None
        return rel_x, rel_s

    def factor_errors(self, z: FactorPair, s: np.ndarray) -> tuple[float, float]:
        d = factor_distance(z, self.z_star)
        diff = s - self.truth.s_star
        d2 = d * d
        return d2, d2 + float(np.sum(diff * diff)) / self.truth.sigma1


def init_phase(
    model: ObservationModel,
    cfg: SolverConfig,
    icfg: InitConfig,
    truth: Optional[GroundTruth] = None,
) -> tuple[FactorPair, np.ndarray, RunTrace]:
    """Initialization: from (X, S) = (0, 0), alternate

        S <- hard_threshold(S - tau' * G, floor(lam * s_count))
        X <- rank_project_clipped(X - eta' * G, k, zeta)

    with G the model gradient at X + S evaluated once per step, then factor
    X_L through its rank-r SVD into balanced (U0, V0) = (Ubar sqrt(Sigma),
    Vbar sqrt(Sigma)). Returns the factors, S_L, and the phase trace, whose
    objective column holds the plain sample loss (no factors exist yet).
    """
    cfg.validate()
    icfg.validate()
    d1, d2 = model.shape
    if cfg.r > min(d1, d2):
        raise ParameterError(f"r={cfg.r} exceeds min(d1, d2)={min(d1, d2)}")
    k_rank = min(math.ceil(icfg.lam_prime * cfg.r), min(d1, d2))
    k_sparse = math.floor(icfg.lam * cfg.s_count)
    scorer = _TruthScorer(truth) if truth is not None else None

    x = np.zeros((d1, d2))
    s = np.zeros((d1, d2))
    trace = RunTrace()
    for ell in range(icfg.init_iters):
        t0 = time.perf_counter()
        g = grad(model, x + s)
        s = hard_threshold(s - icfg.tau_prime * g, k_sparse)
        candidate = x - icfg.eta_prime * g
        sigma1_hat = spectral_norm(candidate)
        if sigma1_hat > 0:
            zeta = icfg.zeta_coeff * cfg.alpha * cfg.r * sigma1_hat / math.sqrt(d1 * d2)
            x = rank_project_clipped(candidate, k_rank, zeta)
        else:
            x = candidate
        obj = loss(model, x + s)
        if not math.isfinite(obj):
            raise DivergenceError(f"objective became non-finite at init iteration {ell}")
        rel_x, rel_s = scorer.matrix_errors(x, s) if scorer else (None, None)
        trace.records.append(
            TraceRecord(
                iteration=ell,
                phase="init",
                objective=obj,
                rel_err_x=rel_x,
                rel_err_s=rel_s,
                d2_z=None,
                d_zs=None,
                secs=time.perf_counter() - t0,
            )
        )

    res = svd_top_k(x, cfg.r)
    root = np.sqrt(res.singular_values)
    factors = FactorPair(u=res.left * root, v=res.right * root)
    return factors, s, trace


def gd_phase(
    model: ObservationModel,
    cfg: SolverConfig,
    start: tuple[FactorPair, np.ndarray],
    truth: Optional[GroundTruth] = None,
    on_iteration: Optional[Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]] = None,
) -> Solution:
    """Gradient descent phase from a warm start (factors, sparse).

    Each iteration evaluates the model gradient G once at (U, V, S) and
    applies the three updates of the descent scheme: the sparse iterate gets
    a double-thresholded step S - tau * G; the factors get balanced gradient
    steps followed by row-norm projection. Both factor bounds are fixed up
    front from the start: b1 = sqrt(alpha r / d1) * ||Z0||_2 (b2 likewise for
    d2), and eta = eta_coeff / (||Z0||_2^2 / 2). The sparse update reads the
    pre-update S, matching the scheme's use of the stale sparse iterate in
    all three lines.

    Trace records (one per iteration, after the update) carry the balanced
    objective and, when *truth* is given, relative errors of X and S, the
    squared rotation-optimal factor distance, and the combined error. A
    non-finite objective raises DivergenceError naming the iteration.
    *on_iteration* (if given) receives (t, U, V, S) after every update.
    """
    cfg.validate()
    d1, d2 = model.shape
    factors, s0 = start
    u = factors.u.copy()
    v = factors.v.copy()
    s = as_matrix(s0, "start sparse").copy()
    if u.shape[0] != d1 or v.shape[0] != d2 or s.shape != (d1, d2):
        raise ParameterError(
            f"start shapes {u.shape}, {v.shape}, {s.shape} do not match model {d1}x{d2}"
        )
    if factors.r != cfg.r:
        raise ParameterError(f"start rank {factors.r} != cfg.r {cfg.r}")

    z0_norm = spectral_norm(np.vstack([u, v]))
    b1 = math.sqrt(cfg.alpha * cfg.r / d1) * z0_norm
    b2 = math.sqrt(cfg.alpha * cfg.r / d2) * z0_norm
    sigma1_hat = z0_norm * z0_norm / 2.0
    eta = cfg.eta_coeff / sigma1_hat if sigma1_hat > 0 else 0.0

    scorer = _TruthScorer(truth) if truth is not None else None
    trace = RunTrace()
    best_obj = math.inf
    last_improvement = 0
    for t in range(cfg.max_iters):
        t0 = time.perf_counter()
        try:
            g = grad(model, u @ v.T + s)
            s_next = double_threshold(
                s - cfg.tau * g, cfg.gamma, cfg.gamma_prime, cfg.s_count, cfg.beta
            )
            balance = u.T @ u - v.T @ v
            gu = g @ v + 0.5 * u @ balance
            gv = g.T @ u - 0.5 * v @ balance
            u = project_row_norm(u - eta * gu, b1)
            v = project_row_norm(v - eta * gv, b2)
            s = s_next
            obj = objective_f(model, u, v, s)
        except NumericalError as exc:
            raise DivergenceError(f"non-finite values at gd iteration {t}: {exc}") from exc
        if not math.isfinite(obj):
            raise DivergenceError(f"objective became non-finite at gd iteration {t}")
        if on_iteration is not None:
            on_iteration(t, u, v, s)

        if scorer is not None:
            x_hat = u @ v.T
            rel_x, rel_s = scorer.matrix_errors(x_hat, s)
            d2_z, d_zs = scorer.factor_errors(FactorPair(u=u, v=v), s)
        else:
            rel_x = rel_s = d2_z = d_zs = None
        trace.records.append(
            TraceRecord(
                iteration=t,
                phase="gd",
                objective=obj,
                rel_err_x=rel_x,
                rel_err_s=rel_s,
                d2_z=d2_z,
                d_zs=d_zs,
                secs=time.perf_counter() - t0,
            )
        )

        if cfg.tol > 0:
            if obj < best_obj * (1.0 - cfg.tol):
                best_obj = obj
                last_improvement = t
            elif obj < best_obj:
                best_obj = obj
            if t - last_improvement >= _STOP_WINDOW:
                break

    out = FactorPair(u=u, v=v)
    return Solution(factors=out, sparse=s, x_hat=out.product(), trace=trace)


def solve(
    model: ObservationModel,
    cfg: SolverConfig,
    icfg: InitConfig,
    truth: Optional[GroundTruth] = None,
    on_iteration: Optional[Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]] = None,
) -> Solution:
    """Initialization followed by gradient descent; one trace with a phase
    marker per record and globally increasing iteration indices."""
    factors, s0, init_trace = init_phase(model, cfg, icfg, truth)
    sol = gd_phase(model, cfg, (factors, s0), truth, on_iteration)
    offset = len(init_trace)
    combined = RunTrace(records=list(init_trace.records))
    for rec in sol.trace.records:
        combined.records.append(
            TraceRecord(
                iteration=rec.iteration + offset,
                phase=rec.phase,
                objective=rec.objective,
                rel_err_x=rec.rel_err_x,
                rel_err_s=rec.rel_err_s,
                d2_z=rec.d2_z,
                d_zs=rec.d_zs,
                secs=rec.secs,
            )
        )
    return Solution(factors=sol.factors, sparse=sol.sparse, x_hat=sol.x_hat, trace=combined)
