"""Dual QP of the (W, b) subproblem and an SMO-style solver for it.

The problem solved is::

    max_a  q.a - 1/(2(1+rho)) * sum_ij a_i a_j y_i y_j K_ij
    s.t.   sum_i a_i y_i = 0,  0 <= a_i <= C

Internally the solver minimises the negated objective with gradient
``G = Q a - q`` where ``Q = (y y^T * K) / (1 + rho)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError
from .quaternion import QMatrix

DEFAULT_TOL = 1e-6
# below this the pair direction is treated as flat (no curvature)
FLAT_CURVATURE = 1e-12


def stack_samples(samples: Sequence[QMatrix]) -> np.ndarray:
    """(N, 4*m*n) matrix of flattened planes; raises on mixed shapes."""
    if len(samples) == 0:
        raise DimensionError("need at least one sample")
    shape = samples[0].shape
    for idx, s in enumerate(samples):
        if s.shape != shape:
            raise DimensionError(f"sample {idx} has shape {s.shape}, expected {shape}")
    return np.stack([s.planes.ravel() for s in samples])


def gram_matrix(samples: Sequence[QMatrix]) -> np.ndarray:
    """K[i, j] = real_inner(X_i, X_j)."""
    flat = stack_samples(samples)
    k = flat @ flat.T
    return 0.5 * (k + k.T)


@dataclass(frozen=True)
class DualQpProblem:
    K: np.ndarray
    y: np.ndarray
    q: np.ndarray
    C: float
    rho: float

    def __post_init__(self):
        K = np.asarray(self.K, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        q = np.asarray(self.q, dtype=np.float64)
        n = K.shape[0]
        if K.shape != (n, n) or y.shape != (n,) or q.shape != (n,):
            raise DimensionError(f"inconsistent sizes K{K.shape} y{y.shape} q{q.shape}")
        if not np.all(np.abs(y) == 1):
            raise ParameterError("labels must be -1 or +1")
        if not self.C > 0:
            raise ParameterError(f"C must be positive, got {self.C}")
        # rho == 0 gives the plain soft-margin SVM dual (used by the baseline)
        if not self.rho >= 0:
            raise ParameterError(f"rho must be nonnegative, got {self.rho}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return len(self.y)

    def hessian(self) -> np.ndarray:
        return np.outer(self.y, self.y) * self.K / (1.0 + self.rho)

    def objective(self, alpha) -> float:
        ay = np.asarray(alpha) * self.y
        return float(self.q @ alpha - 0.5 * ay @ self.K @ ay / (1.0 + self.rho))


@dataclass
class DualSolution:
    alpha: np.ndarray
    kkt_residual: float
    iterations: int
    converged: bool
    objective_history: list[float] = field(default_factory=list)


def build_dual(samples: Sequence[QMatrix], y, U: QMatrix, Z: QMatrix, rho: float, C: float,
               K: np.ndarray) -> DualQpProblem:
    """Linear coefficients q_i = 1 - y_i <U + rho Z, X_i> / (1 + rho)."""
    if not rho > 0:
        raise ParameterError(f"rho must be positive, got {rho}")
    flat = stack_samples(samples)
    if U.shape != samples[0].shape or Z.shape != samples[0].shape:
        raise DimensionError(f"U {U.shape} / Z {Z.shape} do not match samples {samples[0].shape}")
    y = np.asarray(y, dtype=np.float64)
    shift = (U.planes + rho * Z.planes).ravel()
    q = 1.0 - y * (flat @ shift) / (rho + 1.0)
    return DualQpProblem(K=K, y=y, q=q, C=C, rho=rho)


def _violation_sets(alpha, y, C):
    up = ((alpha < C) & (y > 0)) | ((alpha > 0) & (y < 0))
    low = ((alpha < C) & (y < 0)) | ((alpha > 0) & (y > 0))
    return up, low


def _max_violation(grad, alpha, y, C) -> tuple[float, int, int]:
    up, low = _violation_sets(alpha, y, C)
    score = -y * grad
    up_score = np.where(up, score, -np.inf)
    low_score = np.where(low, score, np.inf)
    i = int(np.argmax(up_score))
    j = int(np.argmin(low_score))
    if not (up[i] and low[j]):
        return 0.0, -1, -1
    return float(score[i] - score[j]), i, j


def kkt_residual(p: DualQpProblem, alpha) -> float:
    """Maximal-violating-pair gap plus the equality-constraint violation.

    Zero exactly at optima: no pair of coordinates admits a feasible ascent
    direction of the dual objective.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (p.n,):
        raise DimensionError(f"alpha has shape {alpha.shape}, expected ({p.n},)")
    grad = p.hessian() @ alpha - p.q
    gap, _, _ = _max_violation(grad, alpha, p.y, p.C)
    return max(gap, 0.0) + abs(float(alpha @ p.y))


def solve_dual_qp(p: DualQpProblem, tol: float = DEFAULT_TOL, max_iter: int | None = None,
                  alpha0=None, record_objective: bool = False) -> DualSolution:
    """Pairwise coordinate ascent on the maximal-violating pair.

    ``alpha0`` must be feasible; warm starts from a previous ADMM iteration are.
    Ties in the pair selection go to the lowest index.
    """
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    n, y, C = p.n, p.y, p.C
    if max_iter is None:
        max_iter = 10 * n * n
    Q = p.hessian()
    alpha = np.zeros(n) if alpha0 is None else np.array(alpha0, dtype=np.float64)
    if alpha.shape != (n,):
        raise DimensionError(f"alpha0 has shape {alpha.shape}, expected ({n},)")
    grad = Q @ alpha - p.q
    history = [p.objective(alpha)] if record_objective else []
    it = 0
    converged = False
    while True:
        gap, i, j = _max_violation(grad, alpha, y, C)
        if gap <= tol:
            converged = True
            break
        if it >= max_iter:
            break
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        curv = Q[i, i] + Q[j, j] - 2.0 * y[i] * y[j] * Q[i, j]
        room = min(room_i, room_j)
        # flat direction: the objective is linear along it, go to the bound
        t = room if curv < FLAT_CURVATURE else min(gap / curv, room)
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        if t == room_i:
            alpha[i] = C if y[i] > 0 else 0.0
        if t == room_j:
            alpha[j] = 0.0 if y[j] > 0 else C
        grad += Q[:, i] * (y[i] * t) - Q[:, j] * (y[j] * t)
        it += 1
        if record_objective:
            history.append(p.objective(alpha))
    return DualSolution(
        alpha=alpha,
        kkt_residual=max(gap, 0.0) + abs(float(alpha @ y)),
        iterations=it,
        converged=converged,
        objective_history=history,
    )
