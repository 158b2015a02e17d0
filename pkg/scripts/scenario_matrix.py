#!/usr/bin/env python3
"""Nine-cell train/target scenario matrix of loss-optimal thresholds.

    python3 scripts/scenario_matrix.py --designed --seed 20201 --grid 30
"""
from _common import book, loss_config, parser

from lrod.loss import run_scenario_matrix
from lrod.portfolio import partition_samples


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--technique", choices=("random", "markov"), default="markov")
    p.add_argument("--grid", type=int, default=60, help="largest threshold d (grid is 1..N)")
    args = p.parse_args()
    cfg = loss_config(args, grid=tuple(range(1, args.grid + 1)))
    part = partition_samples(book(args), cfg.payment_threshold)
    print(f"samples: S1={len(part.s1)} S2={len(part.s2)} S3={len(part.s3)}")
    grid = run_scenario_matrix(part, args.technique, cfg, args.seed)
    print(f"{'cell':<6}{'d*':>5}{'min loss':>18}{'loss rate':>12}")
    for i, j, loss, rate, d in grid.optima():
        print(f"s{i[1]}{j[1]:<4}{d:>5}{loss:>18,.2f}{rate:>12.4%}")
    for cell, err in grid.errors.items():
        print(f"s{cell[0][1]}{cell[1][1]}: skipped ({err})")


if __name__ == "__main__":
    main()
