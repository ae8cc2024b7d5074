"""Observation models and their sample losses and gradients.

Two models share one quadratic interface: linear sensing of X + S against a
stack of dense measurement matrices, and direct (possibly partial) entrywise
observation of X + S. Both losses depend on the combined matrix m = X + S
only, so one gradient serves as both the X- and the S-gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DimensionError, NumericalError, ParameterError
from .numerics import as_matrix

__all__ = [
    "SensingProblem",
    "RpcaProblem",
    "ObservationModel",
    "loss",
    "grad",
    "grad_factored",
    "objective_f",
]


@dataclass(frozen=True)
class SensingProblem:
    """n dense sensing matrices A_i (stacked (n, d1, d2)) and measurements y."""

    matrices: np.ndarray
    measurements: np.ndarray
    _flat: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.matrices, dtype=np.float64)
        y = np.asarray(self.measurements, dtype=np.float64)
        if a.ndim != 3:
            raise DimensionError(f"matrices must be (n, d1, d2), got ndim={a.ndim}")
        if y.ndim != 1 or y.shape[0] != a.shape[0]:
            raise DimensionError(
                f"measurements must be a vector of length n={a.shape[0]}, got shape {y.shape}"
            )
        if a.shape[0] < 1:
            raise ParameterError("need at least one measurement")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(y))):
            raise NumericalError("sensing data contains non-finite entries")
        object.__setattr__(self, "matrices", a)
        object.__setattr__(self, "measurements", y)
        object.__setattr__(self, "_flat", a.reshape(a.shape[0], -1))

    @property
    def n(self) -> int:
        return self.matrices.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrices.shape[1], self.matrices.shape[2]

    def apply(self, m: np.ndarray) -> np.ndarray:
        """The n inner products <A_i, m>."""
        return self._flat @ m.ravel()


@dataclass(frozen=True)
class RpcaProblem:
    """Entrywise observations: Y (zeros off-mask), boolean mask, observed rate p."""

    observed: np.ndarray
    mask: np.ndarray
    p: float

    def __post_init__(self) -> None:
        y = as_matrix(self.observed, "observed")
        mask = np.asarray(self.mask)
        if mask.dtype != np.bool_:
            mask = mask.astype(bool)
        if mask.shape != y.shape:
            raise DimensionError(f"mask shape {mask.shape} != observed shape {y.shape}")
        if not 0.0 < self.p <= 1.0:
            raise ParameterError(f"p must be in (0, 1], got {self.p}")
        frac = mask.mean()
        if abs(self.p - frac) > 1.0 / mask.size + 1e-12:
            raise ParameterError(
                f"p={self.p} inconsistent with mask fraction {frac:.6g}"
            )
        if np.any(y[~mask] != 0.0):
            raise ParameterError("observed must be 0 wherever mask is false")
        object.__setattr__(self, "observed", y)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.observed.shape


ObservationModel = Union[SensingProblem, RpcaProblem]


def _check_point(model: ObservationModel, m: np.ndarray) -> np.ndarray:
    a = as_matrix(m, "m")
    if a.shape != model.shape:
        raise DimensionError(f"point shape {a.shape} != model shape {model.shape}")
    return a


def loss(model: ObservationModel, m: np.ndarray) -> float:
    """Sample loss at the combined point m = X + S.

    Sensing: (2n)^-1 * sum_i (y_i - <A_i, m>)^2.
    Entrywise: (2p)^-1 * sum over observed cells of (m - Y)^2.
    """
    a = _check_point(model, m)
    if isinstance(model, SensingProblem):
        resid = model.measurements - model.apply(a)
        return float(resid @ resid) / (2.0 * model.n)
    diff = (a - model.observed)[model.mask]
    return float(diff @ diff) / (2.0 * model.p)


def grad(model: ObservationModel, m: np.ndarray) -> np.ndarray:
    """Gradient of `loss` at m; serves as both the X- and S-gradient.

    Sensing: -(1/n) * sum_i (y_i - <A_i, m>) * A_i.
    Entrywise: (1/p) * mask * (m - Y).
    """
    a = _check_point(model, m)
    if isinstance(model, SensingProblem):
        resid = model.measurements - model.apply(a)
        g = -(model._flat.T @ resid).reshape(model.shape) / model.n
        return g
    return np.where(model.mask, a - model.observed, 0.0) / model.p


def grad_factored(
    model: ObservationModel,
    u: np.ndarray,
    v: np.ndarray,
    s: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the balanced objective with respect to the factors:

        grad_u = G @ V + (1/2) U (U^T U - V^T V)
        grad_v = G^T @ U + (1/2) V (V^T V - U^T U)

    where G = grad(model, U @ V.T + s).
    """
    uu = as_matrix(u, "u")
    vv = as_matrix(v, "v")
    if uu.shape[1] != vv.shape[1]:
        raise DimensionError(
            f"u and v must share a column count, got {uu.shape[1]} and {vv.shape[1]}"
        )
    g = grad(model, uu @ vv.T + as_matrix(s, "s"))
    balance = uu.T @ uu - vv.T @ vv
    return g @ vv + 0.5 * uu @ balance, g.T @ uu - 0.5 * vv @ balance


def objective_f(
    model: ObservationModel,
    u: np.ndarray,
    v: np.ndarray,
    s: np.ndarray,
) -> float:
    """loss(U V^T + S) plus the factor-balancing penalty (1/8)||U^T U - V^T V||_F^2."""
    uu = as_matrix(u, "u")
    vv = as_matrix(v, "v")
    balance = uu.T @ uu - vv.T @ vv
    return loss(model, uu @ vv.T + as_matrix(s, "s")) + 0.125 * float(
        np.sum(balance * balance)
    )
