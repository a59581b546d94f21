"""Repeated 5-fold cross-validation of LSQMM on synthetic low-rank data."""
import json

from lsqmm.metrics import cross_validate, write_cv_report
from lsqmm.trainer import TrainConfig

from _common import base_parser, lowrank


def main():
    p = base_parser(__doc__)
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--lam", type=float, default=1e-3)
    args = p.parse_args()
    X, y = lowrank(args)
    report = cross_validate(X, y, TrainConfig(C=args.C, lam=args.lam), args.folds, args.repeats, args.seed)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_cv_report(report, args.out_dir / "cv.csv", args.out_dir / "cv.json")
    print(json.dumps(report.summary()))


if __name__ == "__main__":
    main()
