"""Accuracy versus the nuclear-norm weight at fixed C, on shared folds."""
from lsqmm.metrics import param_sweep, write_sweep_report
from lsqmm.trainer import TrainConfig

from _common import base_parser, lowrank


def main():
    p = base_parser(__doc__, sigma=0.6)
    p.add_argument("--c-grid", type=float, nargs="+", default=[10.0])
    p.add_argument("--lambda-grid", type=float, nargs="+", default=[1e-4, 1e-3, 1e-2, 1e-1, 1.0])
    args = p.parse_args()
    X, y = lowrank(args)
    result = param_sweep(X, y, TrainConfig(), args.c_grid, args.lambda_grid, args.folds, args.seed,
                         args.repeats)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_sweep_report(result, args.out_dir / "lambda_sweep.csv", args.out_dir / "lambda_sweep.json")
    for c, lam, rep in result.cells():
        print(f"C={c:g} lambda={lam:g} accuracy={rep.accuracy_mean:.4f}+-{rep.accuracy_std:.4f}")


if __name__ == "__main__":
    main()
