"""Accuracy/F1, repeated k-fold cross-validation, and (C, lambda) / noise sweeps."""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .data import NoiseSpec, add_noise, derive_seed, kfold_split
from .dual_qp import DualQpProblem, solve_dual_qp, stack_samples, gram_matrix
from .errors import DimensionError, ParameterError
from .quaternion import QMatrix
from .trainer import TrainConfig, TrainedModel, bias_from_kkt, predict_many, support_set, train

# Choices recorded in every report so that numbers can be traced back to them.
PIPELINE_DECISIONS = {
    "pixel_scale": "channel / 255 -> [0, 1]",
    "resize_filter": "bilinear",
    "noise_model": "X + R * std(imaginary entries of X) * N(0, 1), clipped to [0, 1]",
    "noise_applied_to": "train and test copies",
    "metric_units": "fraction in [0, 1]",
    "std_convention": "population (ddof=0) over all fold evaluations",
    "fold_pairing": "identical folds across grid cells",
}

Fit = Callable[[Sequence[QMatrix], np.ndarray, TrainConfig, np.ndarray], TrainedModel]


def _pair(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise DimensionError(f"length mismatch: {pred.size} predictions vs {truth.size} labels")
    if pred.size == 0:
        raise DimensionError("need at least one prediction")
    return pred, truth


def accuracy(pred, truth) -> float:
    pred, truth = _pair(pred, truth)
    return float(np.mean(pred == truth))


def f1_score(pred, truth, positive: int = 1) -> float:
    """F1 of the positive class; 0 when nothing is predicted or present as positive."""
    pred, truth = _pair(pred, truth)
    tp = np.sum((pred == positive) & (truth == positive))
    fp = np.sum((pred == positive) & (truth != positive))
    fn = np.sum((pred != positive) & (truth == positive))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return float(2 * precision * recall / (precision + recall))


@dataclass
class FoldResult:
    repeat: int
    fold: int
    accuracy: float
    f1: float
    train_seconds: float
    iterations: int
    converged: bool


@dataclass
class EvalReport:
    accuracy_mean: float
    accuracy_std: float
    f1_mean: float
    f1_std: float
    per_fold: list[FoldResult]
    config_echo: dict = field(default_factory=dict)

    @classmethod
    def from_folds(cls, folds: list[FoldResult], config_echo: dict) -> "EvalReport":
        acc = np.array([f.accuracy for f in folds])
        f1 = np.array([f.f1 for f in folds])
        return cls(float(acc.mean()), float(acc.std()), float(f1.mean()), float(f1.std()),
                   folds, config_echo)

    def summary(self) -> dict:
        return {
            "accuracy_mean": self.accuracy_mean,
            "accuracy_std": self.accuracy_std,
            "f1_mean": self.f1_mean,
            "f1_std": self.f1_std,
            "evaluations": len(self.per_fold),
        }


def lsqmm_fit(samples, y, cfg: TrainConfig, K: np.ndarray | None = None) -> TrainedModel:
    return train(samples, y, cfg, K=K)


def baseline_vector_svm(samples: Sequence[QMatrix], y, cfg: TrainConfig,
                        K: np.ndarray | None = None) -> TrainedModel:
    """Linear soft-margin SVM on samples flattened to 3mn reals (i, j, k planes).

    Uses the same dual solver with rho = 0; the result is wrapped as a
    TrainedModel whose W carries the weights on the imaginary planes.
    """
    y = np.asarray(y, dtype=np.float64)
    flat = stack_samples(samples)
    m, n = samples[0].shape
    vec = flat[:, m * n :]
    # a Gram matrix over full quaternions only matches when the real planes vanish
    if K is None or np.any(flat[:, : m * n]):
        K = vec @ vec.T
        K = 0.5 * (K + K.T)
    problem = DualQpProblem(K=K, y=y, q=np.ones(len(y)), C=cfg.C, rho=0.0)
    sol = solve_dual_qp(problem, tol=cfg.dual_tol, max_iter=cfg.dual_max_iter)
    w = (sol.alpha * y) @ vec
    b = bias_from_kkt(sol.alpha, y, vec @ w, cfg.C, cfg.support_margin)
    planes = np.zeros((4, m, n))
    planes[1:] = w.reshape(3, m, n)
    return TrainedModel(
        W=QMatrix(planes),
        b=b,
        alpha=sol.alpha,
        support_indices=support_set(sol.alpha, cfg.C, cfg.support_margin),
        converged=sol.converged,
        iterations=1,
        trace=[],
        config=cfg,
    )


def _config_echo(cfg: TrainConfig, **extra) -> dict:
    return {"train_config": cfg.to_dict(), "pipeline": dict(PIPELINE_DECISIONS), **extra}


def _run_folds(samples, y, cfg, folds, repeat, K, fit: Fit, positive) -> list[FoldResult]:
    n = len(samples)
    out = []
    for f_idx, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(n), test_idx)
        assert np.intersect1d(train_idx, test_idx).size == 0
        t0 = time.perf_counter()
        try:
            model = fit([samples[i] for i in train_idx], y[train_idx], cfg,
                        K[np.ix_(train_idx, train_idx)])
        except Exception as exc:
            raise type(exc)(f"repeat {repeat}, fold {f_idx}: {exc}") from exc
        seconds = time.perf_counter() - t0
        pred = predict_many(model, [samples[i] for i in test_idx])
        truth = y[test_idx]
        out.append(FoldResult(repeat, f_idx, accuracy(pred, truth), f1_score(pred, truth, positive),
                              seconds, model.iterations, bool(model.converged)))
    return out


def _check_inputs(samples, y, k, repeats):
    y = np.asarray(y, dtype=np.int64)
    if len(samples) != len(y):
        raise DimensionError(f"{len(samples)} samples but {len(y)} labels")
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    if repeats < 1:
        raise ParameterError(f"repeats must be >= 1, got {repeats}")
    return y


def cross_validate(samples: Sequence[QMatrix], y, cfg: TrainConfig, k: int = 5, repeats: int = 10,
                   seed: int = 0, *, fit: Fit = lsqmm_fit, positive: int = 1,
                   K: np.ndarray | None = None) -> EvalReport:
    """Stratified k-fold CV repeated ``repeats`` times; repeat r splits with seed + r."""
    y = _check_inputs(samples, y, k, repeats)
    if K is None:
        K = gram_matrix(samples)
    folds = []
    for r in range(repeats):
        split = kfold_split(len(samples), k, seed + r, labels=y)
        folds.extend(_run_folds(samples, y, cfg, split, r, K, fit, positive))
    echo = _config_echo(cfg, k=k, repeats=repeats, seed=seed, positive_class=positive,
                        model=getattr(fit, "__name__", str(fit)))
    return EvalReport.from_folds(folds, echo)


@dataclass
class SweepResult:
    C_grid: list[float]
    lambda_grid: list[float]
    reports: list[list[EvalReport]]  # reports[i][j] <-> (C_grid[i], lambda_grid[j])

    def accuracy_table(self) -> np.ndarray:
        return np.array([[r.accuracy_mean for r in row] for row in self.reports])

    def cells(self):
        for i, c in enumerate(self.C_grid):
            for j, lam in enumerate(self.lambda_grid):
                yield c, lam, self.reports[i][j]


def param_sweep(samples: Sequence[QMatrix], y, base_cfg: TrainConfig, C_grid: Sequence[float],
                lambda_grid: Sequence[float], k: int = 5, seed: int = 0, repeats: int = 1, *,
                fit: Fit = lsqmm_fit, positive: int = 1) -> SweepResult:
    """One cross-validation per (C, lambda) cell, every cell on the same folds."""
    if len(C_grid) == 0 or len(lambda_grid) == 0:
        raise ParameterError("sweep grids must be non-empty")
    K = gram_matrix(samples)
    reports = []
    for c in C_grid:
        row = []
        for lam in lambda_grid:
            cfg = _replace(base_cfg, C=float(c), lam=float(lam))
            row.append(cross_validate(samples, y, cfg, k, repeats, seed, fit=fit, positive=positive, K=K))
        reports.append(row)
    return SweepResult([float(c) for c in C_grid], [float(v) for v in lambda_grid], reports)


def _replace(cfg: TrainConfig, **changes) -> TrainConfig:
    return TrainConfig(**{**cfg.to_dict(), **changes})


def noise_sweep(samples: Sequence[QMatrix], y, cfg: TrainConfig, R_grid: Sequence[float], k: int = 5,
                seed: int = 0, repeats: int = 1, *, fit: Fit = lsqmm_fit, positive: int = 1
                ) -> list[tuple[float, EvalReport]]:
    """Noise the whole dataset at each ratio R (fresh per-sample seeds), then cross-validate."""
    out = []
    for r_idx, ratio in enumerate(R_grid):
        if not ratio >= 0:
            raise ParameterError(f"noise ratio must be nonnegative, got {ratio}")
        noisy = [
            add_noise(X, NoiseSpec(float(ratio), derive_seed(seed, r_idx, i)))
            for i, X in enumerate(samples)
        ]
        report = cross_validate(noisy, y, cfg, k, repeats, seed, fit=fit, positive=positive)
        report.config_echo["noise_ratio"] = float(ratio)
        out.append((float(ratio), report))
    return out


# -- report files -------------------------------------------------------------

FOLD_COLUMNS = ["repeat", "fold", "accuracy", "f1", "train_seconds", "iterations", "converged"]


def _fold_row(f: FoldResult) -> list:
    return [f.repeat, f.fold, repr(f.accuracy), repr(f.f1), repr(f.train_seconds), f.iterations,
            int(f.converged)]


def write_fold_csv(path, rows: Sequence[tuple[dict, FoldResult]]) -> None:
    """One row per fold evaluation; ``rows`` pairs extra key columns with each fold."""
    path = Path(path)
    keys = list(rows[0][0].keys()) if rows else []
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys + FOLD_COLUMNS)
        for extra, fold in rows:
            w.writerow([extra[k] for k in keys] + _fold_row(fold))


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def report_payload(kind: str, **body) -> dict:
    return {"kind": kind, "artifact_version": __version__, "decisions": dict(PIPELINE_DECISIONS), **body}


def write_cv_report(report: EvalReport, csv_path, json_path) -> None:
    write_fold_csv(csv_path, [({}, f) for f in report.per_fold])
    write_json(json_path, report_payload("cv", summary=report.summary(), config=report.config_echo))


def write_sweep_report(result: SweepResult, csv_path, json_path) -> None:
    rows, cells = [], []
    for c, lam, rep in result.cells():
        rows.extend(({"C": repr(c), "lambda": repr(lam)}, f) for f in rep.per_fold)
        cells.append({"C": c, "lambda": lam, **rep.summary()})
    write_fold_csv(csv_path, rows)
    config = result.reports[0][0].config_echo if result.reports else {}
    write_json(json_path, report_payload("sweep", C_grid=result.C_grid, lambda_grid=result.lambda_grid,
                                         cells=cells, config=config))


def write_noise_report(results: list[tuple[float, EvalReport]], csv_path, json_path) -> None:
    rows, entries = [], []
    for ratio, rep in results:
        rows.extend(({"R": repr(ratio)}, f) for f in rep.per_fold)
        entries.append({"R": ratio, **rep.summary()})
    write_fold_csv(csv_path, rows)
    config = dict(results[0][1].config_echo) if results else {}
    config.pop("noise_ratio", None)
    write_json(json_path, report_payload("noise-sweep", entries=entries, config=config))
