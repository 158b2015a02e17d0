#!/usr/bin/env python3
"""Static-rate negative control: constant receipt ratios give no interior minimum.

    python3 scripts/appendix_static.py --designed --grid 60
"""
from _common import book, loss_config, parser

from lrod.loss import static_rate_loss_curve


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--rates", default="0.5,0.75,1.0")
    p.add_argument("--grid", type=int, default=30, help="largest threshold d (grid is 1..N)")
    args = p.parse_args()
    cfg = loss_config(args, grid=tuple(range(1, args.grid + 1)))
    rates = [float(r) for r in args.rates.split(",")]
    curves = static_rate_loss_curve(book(args), rates, cfg)
    for rate, curve in curves.items():
        end = curve.losses[-1]
        gap = (end - curve.minimum_loss) / end
        print(f"l={rate:g}: d*={curve.optimal_threshold}, loss at d=max {end:,.2f}, "
              f"gap to minimum {gap:.2e}")


if __name__ == "__main__":
    main()
