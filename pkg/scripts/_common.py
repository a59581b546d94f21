"""Shared argument handling for the experiment scripts."""
import argparse
from pathlib import Path

from lsqmm.data import split_xy, synth_contrast, synth_lowrank


def base_parser(description, sigma=0.05):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--size", type=int, default=16, help="square sample side")
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--sigma", type=float, default=sigma)
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--seed", type=int, default=0, help="split seed")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    return p


def lowrank(args):
    return split_xy(synth_lowrank(args.n_per_class, args.size, args.size, args.rank, args.sigma,
                                  args.data_seed))


def contrast(args, amount, seed):
    return split_xy(synth_contrast(args.n_per_class, args.size, args.size, args.rank, args.sigma,
                                   amount, seed))
