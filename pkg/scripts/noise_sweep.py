"""Accuracy degradation under Gaussian pixel noise of growing ratio."""
from lsqmm.metrics import noise_sweep, write_noise_report
from lsqmm.trainer import TrainConfig

from _common import base_parser, lowrank


def main():
    p = base_parser(__doc__, sigma=0.6)
    p.add_argument("--ratios", type=float, nargs="+", default=[0.0, 0.1, 0.5, 1.0])
    p.add_argument("--C", type=float, default=10.0)
    args = p.parse_args()
    X, y = lowrank(args)
    results = noise_sweep(X, y, TrainConfig(C=args.C), args.ratios, args.folds, args.seed, args.repeats)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_noise_report(results, args.out_dir / "noise.csv", args.out_dir / "noise.json")
    for ratio, rep in results:
        print(f"R={ratio:g} accuracy={rep.accuracy_mean:.4f} f1={rep.f1_mean:.4f}")


if __name__ == "__main__":
    main()
