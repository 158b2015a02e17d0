#!/usr/bin/env python3
"""Cross-validated PAR table for both techniques over several fold seeds."""
from _common import book, parser

from lrod.validate import compare_techniques, format_reports


def main():
    p = parser(__doc__)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--fold-seeds", type=int, default=5)
    args = p.parse_args()
    portfolio = book(args)
    wins = 0
    for seed in range(args.seed, args.seed + args.fold_seeds):
        reports = compare_techniques(portfolio, k=args.folds, seed=seed)
        wins += reports["markov"].par_gap < reports["random"].par_gap
        print(f"-- fold seed {seed}")
        print(format_reports(reports))
    print(f"Markov closer to actual PAR in {wins}/{args.fold_seeds} fold seeds")


if __name__ == "__main__":
    main()
