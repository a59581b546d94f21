"""ADMM training loop for the low-rank support quaternion matrix machine.

Each iteration solves the dual QP for (W, b), shrinks the singular values of
``W - U/rho`` to get Z, and takes a dual step on U. Training starts from
W = Z = U = 0, b = 0 and stops once ``||W - Z|| / max(||W||, ||Z||) < tol``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dual_qp import (
    DEFAULT_TOL,
    DualQpProblem,
    gram_matrix,
    solve_dual_qp,
    stack_samples,
)
from .errors import DimensionError, NumericError, ParameterError
from .quaternion import QMatrix, check_finite, fro_norm, real_inner
from .qsvd import svt

log = logging.getLogger(__name__)

MAX_TAU = 1.618


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    lam: float = 1e-3
    rho: float = 1.0
    tau: float = 1.0
    tol: float = 1e-3
    max_iter: int = 1000
    # margin that separates "strictly inside (0, C)" from "at a bound"; None -> 1e-8 * C
    qp_tol: float | None = None
    dual_tol: float = DEFAULT_TOL
    dual_max_iter: int | None = None

    def __post_init__(self):
        if not self.C > 0:
            raise ParameterError(f"C must be positive, got {self.C}")
        if not self.lam >= 0:
            raise ParameterError(f"lambda must be nonnegative, got {self.lam}")
        if not self.rho > 0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if not 0 < self.tau <= MAX_TAU:
            raise ParameterError(f"tau must lie in (0, {MAX_TAU}], got {self.tau}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.qp_tol is not None and not self.qp_tol > 0:
            raise ParameterError(f"qp_tol must be positive, got {self.qp_tol}")
        if not self.dual_tol > 0:
            raise ParameterError(f"dual_tol must be positive, got {self.dual_tol}")

    @property
    def support_margin(self) -> float:
        return 1e-8 * self.C if self.qp_tol is None else self.qp_tol

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    objective: float
    residual: float
    seconds: float


@dataclass
class AdmmState:
    W: QMatrix
    Z: QMatrix
    U: QMatrix
    b: float = 0.0
    k: int = 0
    alpha: np.ndarray | None = None

    @classmethod
    def zeros(cls, m: int, n: int) -> "AdmmState":
        z = QMatrix.zeros(m, n)
        return cls(W=z, Z=z, U=z)


@dataclass
class TrainedModel:
    W: QMatrix
    b: float
    alpha: np.ndarray
    support_indices: np.ndarray
    converged: bool
    iterations: int
    trace: list[TraceRecord] = field(default_factory=list)
    config: TrainConfig = field(default_factory=TrainConfig)

    @property
    def shape(self) -> tuple[int, int]:
        return self.W.shape

    @property
    def final_residual(self) -> float:
        return self.trace[-1].residual if self.trace else float("nan")


def _labels(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if not np.all(np.abs(y) == 1):
        raise ParameterError("labels must be -1 or +1")
    return y


def support_set(alpha: np.ndarray, C: float, margin: float) -> np.ndarray:
    return np.flatnonzero((alpha > margin) & (alpha < C - margin))


def bias_from_kkt(alpha, y, f, C: float, margin: float, previous: float = 0.0) -> float:
    """Bias from the support set, or the midpoint of the KKT-feasible interval.

    ``f`` holds real_inner(W, X_i). When no multiplier is strictly inside the
    box, bounded multipliers pin b to an interval; if it is one-sided or
    empty the previous bias is kept.
    """
    sv = support_set(alpha, C, margin)
    if sv.size:
        return float(np.mean(y[sv] - f[sv]))
    at_zero = alpha <= margin
    at_c = alpha >= C - margin
    pos, neg = y > 0, y < 0
    lower = np.concatenate([(1 - f)[at_zero & pos], (-1 - f)[at_c & neg]])
    upper = np.concatenate([(-1 - f)[at_zero & neg], (1 - f)[at_c & pos]])
    if lower.size == 0 or upper.size == 0:
        return previous
    lo, hi = lower.max(), upper.min()
    if lo > hi:
        return previous
    return float(0.5 * (lo + hi))


@dataclass
class WbUpdate:
    W: QMatrix
    b: float
    alpha: np.ndarray
    support_indices: np.ndarray
    dual_iterations: int
    dual_residual: float


def update_wb(state: AdmmState, samples: Sequence[QMatrix], y, cfg: TrainConfig, K: np.ndarray,
              *, flat: np.ndarray | None = None) -> WbUpdate:
    """Solve the dual QP and form W = (rho Z + U + sum a_i y_i X_i) / (1 + rho) and b."""
    y = _labels(y)
    if flat is None:
        flat = stack_samples(samples)
    shape = state.W.shape
    rho = cfg.rho
    shift = (state.U.planes + rho * state.Z.planes).ravel()
    if shift.size != flat.shape[1]:
        raise DimensionError(f"state shape {shape} does not match the samples")
    q = 1.0 - y * (flat @ shift) / (rho + 1.0)
    problem = DualQpProblem(K=K, y=y, q=q, C=cfg.C, rho=rho)
    sol = solve_dual_qp(problem, tol=cfg.dual_tol, max_iter=cfg.dual_max_iter, alpha0=state.alpha)
    if not sol.converged:
        log.warning("dual QP stopped at max_iter with residual %.3g", sol.kkt_residual)
    alpha = sol.alpha
    w_flat = (shift + (alpha * y) @ flat) / (1.0 + rho)
    W = QMatrix(w_flat.reshape(4, *shape))
    f = flat @ w_flat
    margin = cfg.support_margin
    b = bias_from_kkt(alpha, y, f, cfg.C, margin, previous=state.b)
    return WbUpdate(W, b, alpha, support_set(alpha, cfg.C, margin), sol.iterations, sol.kkt_residual)


def _update_z(W: QMatrix, U: QMatrix, cfg: TrainConfig) -> tuple[QMatrix, float]:
    target = W - U / cfg.rho
    if cfg.lam == 0:
        return target, 0.0
    Z, sigma = svt(target, cfg.lam / cfg.rho)
    return Z, float(sigma.sum())


def update_z(W: QMatrix, U: QMatrix, cfg: TrainConfig) -> QMatrix:
    """Z = prox_{(lam/rho)||.||_*}(W - U/rho)."""
    return _update_z(W, U, cfg)[0]


def update_u(U: QMatrix, W: QMatrix, Z: QMatrix, cfg: TrainConfig) -> QMatrix:
    return QMatrix(U.planes - cfg.tau * cfg.rho * (W.planes - Z.planes))


def relative_residual(W: QMatrix, Z: QMatrix) -> float:
    return fro_norm(W - Z) / max(fro_norm(W), fro_norm(Z), 1e-12)


def objective(W: QMatrix, b: float, Z_nuclear: float, f: np.ndarray, y: np.ndarray,
              cfg: TrainConfig) -> float:
    """0.5||W||^2 + lam ||Z||_* + C sum hinge(1 - y_i (f_i + b))."""
    hinge = np.maximum(0.0, 1.0 - y * (f + b))
    return float(0.5 * fro_norm(W) ** 2 + cfg.lam * Z_nuclear + cfg.C * hinge.sum())


def train(samples: Sequence[QMatrix], y, cfg: TrainConfig | None = None, *,
          K: np.ndarray | None = None,
          callback: Callable[[AdmmState], None] | None = None) -> TrainedModel:
    """Run the ADMM iterations; ``K`` may be passed to reuse a precomputed Gram matrix."""
    cfg = cfg or TrainConfig()
    y = _labels(y)
    if len(samples) != len(y):
        raise DimensionError(f"{len(samples)} samples but {len(y)} labels")
    flat = stack_samples(samples)
    if not np.all(np.isfinite(flat)):
        raise NumericError("training samples contain non-finite entries")
    if K is None:
        K = gram_matrix(samples)
    m, n = samples[0].shape
    state = AdmmState.zeros(m, n)
    trace: list[TraceRecord] = []
    converged = False
    t0 = time.perf_counter()
    for k in range(1, int(cfg.max_iter) + 1):
        upd = update_wb(state, samples, y, cfg, K, flat=flat)
        Z, z_nuc = _update_z(upd.W, state.U, cfg)
        U = update_u(state.U, upd.W, Z, cfg)
        state = AdmmState(W=upd.W, Z=Z, U=U, b=upd.b, k=k, alpha=upd.alpha)
        check_finite(U)
        res = relative_residual(upd.W, Z)
        f = flat @ upd.W.planes.ravel()
        trace.append(TraceRecord(k, objective(upd.W, upd.b, z_nuc, f, y, cfg), res,
                                 time.perf_counter() - t0))
        if callback is not None:
            callback(state)
        if res < cfg.tol:
            converged = True
            break
    log.info("ADMM stopped after %d iterations (residual %.3g, converged=%s)",
             state.k, trace[-1].residual, converged)
    return TrainedModel(
        W=state.W,
        b=state.b,
        alpha=state.alpha,
        support_indices=support_set(state.alpha, cfg.C, cfg.support_margin),
        converged=converged,
        iterations=state.k,
        trace=trace,
        config=cfg,
    )


def decision_value(model: TrainedModel, X: QMatrix) -> float:
    if X.shape != model.shape:
        raise DimensionError(f"sample shape {X.shape} does not match model shape {model.shape}")
    return real_inner(model.W, X) + model.b


def decision_values(model: TrainedModel, samples: Sequence[QMatrix]) -> np.ndarray:
    if len(samples) == 0:
        return np.zeros(0)
    flat = stack_samples(samples)
    if samples[0].shape != model.shape:
        raise DimensionError(f"sample shape {samples[0].shape} does not match model shape {model.shape}")
    return flat @ model.W.planes.ravel() + model.b


def predict(model: TrainedModel, X: QMatrix) -> int:
    """Sign of the decision value; exact zero maps to +1."""
    return 1 if decision_value(model, X) >= 0 else -1


def predict_many(model: TrainedModel, samples: Sequence[QMatrix]) -> np.ndarray:
    return np.where(decision_values(model, samples) >= 0, 1, -1)
