"""Command-line entry point.

Every subcommand prints one JSON line on stdout; diagnostics go to stderr.
Exit codes: 0 ok, 2 I/O, 3 validation, 4 numeric failure, 64 usage.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .data import export_dataset, load_manifest, parse_size, split_xy, synth_contrast, synth_lowrank
from .errors import ParameterError
from .metrics import (
    baseline_vector_svm,
    cross_validate,
    lsqmm_fit,
    noise_sweep,
    param_sweep,
    write_cv_report,
    write_noise_report,
    write_sweep_report,
)
from .model_io import load_model, save_model
from .trainer import TrainConfig, decision_values, train

EXIT_IO, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_USAGE = 2, 3, 4, 64

log = logging.getLogger("lsqmm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _size(text: str) -> tuple[int, int]:
    try:
        return parse_size(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training")
    g.add_argument("--soft-margin-c", type=float, default=1.0, dest="C")
    g.add_argument("--lambda", type=float, default=1e-3, dest="lam")
    g.add_argument("--rho", type=float, default=1.0)
    g.add_argument("--tau", type=float, default=1.0)
    g.add_argument("--tol", type=float, default=1e-3)
    g.add_argument("--max-iter", type=int, default=1000)
    g.add_argument("--dual-tol", type=float, default=1e-6)


def _add_data_flags(p: argparse.ArgumentParser, required: bool = False) -> None:
    g = p.add_argument_group("data (manifest or synthetic)")
    g.add_argument("--manifest", type=Path)
    g.add_argument("--target-size", type=_size, help="MxN image size after resizing")
    g.add_argument("--synth", action="store_true", help="generate a synthetic dataset instead")
    g.add_argument("--n-per-class", type=int, default=20)
    g.add_argument("--synth-size", type=_size, default=(16, 16))
    g.add_argument("--rank", type=int, default=2)
    g.add_argument("--sigma", type=float, default=0.05)
    g.add_argument("--contrast", type=float, default=None,
                   help="shared background with a rank-1 class difference of this size")
    g.add_argument("--data-seed", type=int, default=0)


def _add_eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=["lsqmm", "baseline"], default="lsqmm")
    p.add_argument("--out-prefix", type=Path, required=True,
                   help="writes <prefix>.csv (per fold) and <prefix>.json (summary)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lsqmm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model and write it to disk")
    _add_data_flags(p)
    _add_config_flags(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("predict", help="score a manifest with a trained model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--target-size", type=_size, default=None)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("cv", help="repeated k-fold cross-validation")
    _add_data_flags(p)
    _add_config_flags(p)
    _add_eval_flags(p)

    p = sub.add_parser("sweep", help="cross-validate every (C, lambda) pair")
    _add_data_flags(p)
    _add_config_flags(p)
    _add_eval_flags(p)
    p.add_argument("--c-grid", type=_float_list, required=True)
    p.add_argument("--lambda-grid", type=_float_list, required=True)

    p = sub.add_parser("noise-sweep", help="cross-validate at several Gaussian noise ratios")
    _add_data_flags(p)
    _add_config_flags(p)
    _add_eval_flags(p)
    p.add_argument("--ratios", type=_float_list, required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset as PNGs plus a manifest")
    _add_data_flags(p)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--name", default="synth")

    p = sub.add_parser("trace", help="export the per-iteration objective/residual trace")
    p.add_argument("--model", type=Path, default=None, help="read the trace from a model file")
    _add_data_flags(p)
    _add_config_flags(p)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _config(args) -> TrainConfig:
    return TrainConfig(C=args.C, lam=args.lam, rho=args.rho, tau=args.tau, tol=args.tol,
                       max_iter=args.max_iter, dual_tol=args.dual_tol)


def _dataset(args):
    if args.synth:
        m, n = args.synth_size
        if args.contrast is not None:
            samples = synth_contrast(args.n_per_class, m, n, args.rank, args.sigma, args.contrast,
                                     args.data_seed)
        else:
            samples = synth_lowrank(args.n_per_class, m, n, args.rank, args.sigma, args.data_seed)
        return samples
    if args.manifest is None:
        raise UsageError("either --manifest or --synth is required")
    if args.target_size is None:
        raise UsageError("--target-size is required with --manifest")
    _, samples = load_manifest(args.manifest, args.target_size)
    return samples


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def cmd_train(args) -> int:
    X, y = split_xy(_dataset(args))
    t0 = time.perf_counter()
    model = train(X, y, _config(args))
    seconds = time.perf_counter() - t0
    save_model(model, args.out)
    _emit({"command": "train", "model": str(args.out), "iterations": model.iterations,
           "converged": model.converged, "final_residual": model.final_residual,
           "n_support": int(len(model.support_indices)), "seconds": seconds})
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    size = args.target_size or model.shape
    if tuple(size) != tuple(model.shape):
        log.error("image size %s does not match model shape %s", size, model.shape)
        _emit({"command": "predict", "error": "shape mismatch", "model_shape": list(model.shape),
               "target_size": list(size)})
        return EXIT_VALIDATION
    manifest, samples = load_manifest(args.manifest, tuple(size))
    X, _ = split_xy(samples)
    scores = decision_values(model, X)
    with args.out.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "decision_value", "predicted_label"])
        for s, f in zip(samples, scores):
            w.writerow([s.source_id, repr(float(f)), 1 if f >= 0 else -1])
    _emit({"command": "predict", "predictions": str(args.out), "count": len(samples)})
    return 0


def _fit(args):
    return baseline_vector_svm if args.model == "baseline" else lsqmm_fit


def _paths(prefix: Path) -> tuple[Path, Path]:
    prefix.parent.mkdir(parents=True, exist_ok=True)
    return prefix.with_name(prefix.name + ".csv"), prefix.with_name(prefix.name + ".json")


def cmd_cv(args) -> int:
    X, y = split_xy(_dataset(args))
    report = cross_validate(X, y, _config(args), args.folds, args.repeats, args.seed, fit=_fit(args))
    csv_path, json_path = _paths(args.out_prefix)
    write_cv_report(report, csv_path, json_path)
    _emit({"command": "cv", "csv": str(csv_path), "json": str(json_path), **report.summary()})
    return 0


def cmd_sweep(args) -> int:
    X, y = split_xy(_dataset(args))
    result = param_sweep(X, y, _config(args), args.c_grid, args.lambda_grid, args.folds, args.seed,
                         args.repeats, fit=_fit(args))
    csv_path, json_path = _paths(args.out_prefix)
    write_sweep_report(result, csv_path, json_path)
    _emit({"command": "sweep", "csv": str(csv_path), "json": str(json_path),
           "cells": len(result.C_grid) * len(result.lambda_grid),
           "accuracy": result.accuracy_table().tolist()})
    return 0


def cmd_noise_sweep(args) -> int:
    X, y = split_xy(_dataset(args))
    results = noise_sweep(X, y, _config(args), args.ratios, args.folds, args.seed, args.repeats,
                          fit=_fit(args))
    csv_path, json_path = _paths(args.out_prefix)
    write_noise_report(results, csv_path, json_path)
    _emit({"command": "noise-sweep", "csv": str(csv_path), "json": str(json_path),
           "entries": [{"R": r, "accuracy_mean": rep.accuracy_mean} for r, rep in results]})
    return 0


def cmd_synth(args) -> int:
    args.synth = True
    samples = _dataset(args)
    manifest = export_dataset(samples, args.out_dir, args.name)
    _emit({"command": "synth", "manifest": str(manifest), "count": len(samples)})
    return 0


def cmd_trace(args) -> int:
    if args.model is not None:
        model = load_model(args.model)
    else:
        X, y = split_xy(_dataset(args))
        model = train(X, y, _config(args))
    if not model.trace:
        log.error("model has no training trace")
        return EXIT_VALIDATION
    with args.out.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "objective", "residual", "seconds"])
        for t in model.trace:
            w.writerow([t.iteration, repr(t.objective), repr(t.residual), repr(t.seconds)])
    _emit({"command": "trace", "trace": str(args.out), "iterations": len(model.trace),
           "final_residual": model.final_residual})
    return 0


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "sweep": cmd_sweep,
    "noise-sweep": cmd_noise_sweep,
    "synth": cmd_synth,
    "trace": cmd_trace,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
