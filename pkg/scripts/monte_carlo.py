#!/usr/bin/env python3
"""Monte Carlo mean loss-rate curve with 99% confidence bands.

    python3 scripts/monte_carlo.py --trials 500 --threads 4
"""
import time

from _common import book, loss_config, parser

from lrod.completion import train
from lrod.fitting import EXPONENTIAL
from lrod.loss import monte_carlo_optimise
from lrod.portfolio import partition_samples


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--technique", choices=("random", "markov"), default="markov")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--term", type=int, default=60, help="contract term of the generated book")
    p.add_argument("--accounts", type=int, default=500)
    args = p.parse_args()
    cfg = loss_config(args)
    portfolio = book(args, n_accounts=args.accounts, term=args.term)
    s1 = partition_samples(portfolio, cfg.payment_threshold).s1
    params = train(args.technique, s1, EXPONENTIAL if args.technique == "random" else None,
                   cfg.payment_threshold)
    start = time.perf_counter()
    summary = monte_carlo_optimise(portfolio, params, cfg, args.trials, args.seed, threads=args.threads)
    elapsed = time.perf_counter() - start
    print(f"{args.trials} trials in {elapsed:.1f}s; d* = {summary.optimal_threshold}, "
          f"mean loss rate {summary.minimum_mean:.4%}")
    print(f"{'d':>4}{'mean':>10}{'ci_low':>10}{'ci_high':>10}")
    for d, _, mean, _, _, lo, hi in summary.rows():
        print(f"{d:>4}{mean:>10.4%}{lo:>10.4%}{hi:>10.4%}")


if __name__ == "__main__":
    main()
