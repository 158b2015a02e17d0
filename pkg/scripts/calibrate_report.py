#!/usr/bin/env python3
"""Per-sample calibration summary: b, truncation fits and Markov matrices."""
from _common import book, loss_config, parser

from lrod.errors import LrodError
from lrod.fitting import FITTERS, select_distribution
from lrod.forecast_markov import estimate_transition_matrix, format_matrix
from lrod.forecast_random import estimate_payment_probability, truncation_maxima
from lrod.portfolio import partition_samples


def main():
    args = parser(__doc__).parse_args()
    cfg = loss_config(args)
    part = partition_samples(book(args), cfg.payment_threshold)
    for name in ("S1", "S2", "S3"):
        sample = part[name]
        print(f"== {name}: {len(sample)} accounts")
        if not len(sample):
            continue
        print(f"b = {estimate_payment_probability(sample):.4f}")
        maxima = truncation_maxima(sample, cfg.payment_threshold)
        fits = []
        for family, fitter in FITTERS.items():
            try:
                fits.append(fitter(maxima))
            except LrodError as exc:
                print(f"{family}: not fitted ({exc})")
        for f in fits:
            print(f"{f.family:<12} params={tuple(round(v, 5) for v in f.params)} "
                  f"AIC={f.aic:.2f} KS={f.ks_statistic:.4f}")
        if fits:
            print(f"selected: {select_distribution(fits).family}")
        print(format_matrix(estimate_transition_matrix(sample, cfg.payment_threshold)))


if __name__ == "__main__":
    main()
