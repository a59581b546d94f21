"""Objective and relative residual per ADMM iteration."""
import csv

from lsqmm.trainer import TrainConfig, train

from _common import base_parser, lowrank


def main():
    p = base_parser(__doc__)
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--lam", type=float, nargs="+", default=[1e-3, 1e-1, 1.0])
    args = p.parse_args()
    X, y = lowrank(args)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    with open(args.out_dir / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "iter", "objective", "residual", "seconds"])
        for lam in args.lam:
            model = train(X, y, TrainConfig(C=args.C, lam=lam))
            for t in model.trace:
                w.writerow([lam, t.iteration, repr(t.objective), repr(t.residual), repr(t.seconds)])
            print(f"lambda={lam:g}: {model.iterations} iterations, residual {model.final_residual:.2e}")


if __name__ == "__main__":
    main()
