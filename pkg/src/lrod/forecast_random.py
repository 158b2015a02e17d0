"""Random defaults with empirical truncation.

Each future month is paid in full with probability ``b`` and missed
otherwise. The forecast is then cut off for good once g1 first reaches a
per-account level ``k`` drawn from a distribution fitted to historical
delinquency maxima.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .amort import AmortContext
from .delinquency import DEFAULT_PAYMENT_THRESHOLD, g1_levels
from .errors import DomainError, NothingToForecastError, PreconditionError
from .fitting import EXPONENTIAL, FITTERS, WEIBULL, FittedDistribution, inverse_cdf
from .portfolio import LoanHistory, Portfolio


@dataclass(frozen=True)
class RandomDefaultsParams:
    b: float
    family: Optional[str] = None
    dist_params: tuple = ()
    fit: Optional[FittedDistribution] = None

    def __post_init__(self):
        if not 0.0 <= self.b <= 1.0:
            raise DomainError(f"payment probability must lie in [0, 1], got {self.b}")
        if self.family == EXPONENTIAL:
            if len(self.dist_params) != 1 or self.dist_params[0] <= 0:
                raise DomainError("Exponential truncation needs one positive rate")
        elif self.family == WEIBULL:
            if len(self.dist_params) != 2 or min(self.dist_params) <= 0:
                raise DomainError("Weibull truncation needs positive scale and shape")
        elif self.family is not None:
            raise DomainError(f"unknown truncation family {self.family!r}")

    @property
    def truncates(self) -> bool:
        return self.family is not None

    def vector(self) -> list:
        """Flat parameter vector, used for stability diagnostics."""
        return [self.b, *self.dist_params]


def payment_frequency(account: LoanHistory) -> float:
    inst = account.instalments
    rec = account.receipts
    return float(np.count_nonzero(rec >= inst)) / account.t0


def estimate_payment_probability(sample: Portfolio) -> float:
    """Mean over accounts of each account's share of fully paid months."""
    if len(sample) == 0:
        raise DomainError("cannot estimate a payment probability from an empty sample")
    freqs = []
    for acc in sample:
        if acc.t0 < 1:
            raise PreconditionError(f"account {acc.account_id} has no observed periods")
        freqs.append(payment_frequency(acc))
    return math.fsum(freqs) / len(freqs)


def truncation_maxima(sample: Portfolio, p: float = DEFAULT_PAYMENT_THRESHOLD) -> list:
    """Positive per-account maxima of observed g1; zero maxima carry no truncation."""
    return [m for m in (acc.max_observed_level(p) for acc in sample) if m > 0]


def train_random(sample: Portfolio, family: Optional[str] = EXPONENTIAL,
                 p: float = DEFAULT_PAYMENT_THRESHOLD) -> RandomDefaultsParams:
    b = estimate_payment_probability(sample)
    if family is None:
        return RandomDefaultsParams(b)
    maxima = truncation_maxima(sample, p)
    if not maxima:
        return RandomDefaultsParams(b)
    fit = FITTERS[family](maxima)
    return RandomDefaultsParams(b, fit.family, tuple(float(v) for v in fit.params), fit)


def draw_truncation(params: RandomDefaultsParams, rng) -> float:
    """Inverse-CDF draw of the truncation level; consumes exactly one uniform."""
    u = float(rng.random())
    if not params.truncates:
        return math.inf
    return float(inverse_cdf(params.family, params.dist_params, u))


def random_receipts(instalments, b: float, u) -> np.ndarray:
    inst = np.asarray(instalments, dtype=float)
    return np.where(np.asarray(u) < b, inst, 0.0)


def truncation_period(levels, k: float, first_period: int) -> Optional[int]:
    """``min(j >= first_period : g1(j) >= k)`` with 1-based j, or None."""
    for j in range(max(first_period, 1), len(levels) + 1):
        if levels[j - 1] >= k:
            return j
    return None


def truncate(receipts, levels, k: float, first_period: int) -> np.ndarray:
    """Zero every receipt strictly after the truncation period, if it exists."""
    out = np.array(receipts, dtype=float)
    t_k = truncation_period(levels, k, first_period)
    if t_k is not None:
        out[t_k:] = 0.0
    return out


def forecast_random(account: LoanHistory, params: RandomDefaultsParams, k_draw: float, rng,
                    p: float = DEFAULT_PAYMENT_THRESHOLD) -> np.ndarray:
    """Receipts for t = 1..t_c: observed history followed by a truncated forecast."""
    inst, rec = complete_random(account, params, k_draw, rng, p)
    return rec


def complete_random(account: LoanHistory, params: RandomDefaultsParams, k_draw: float, rng,
                    p: float = DEFAULT_PAYMENT_THRESHOLD):
    """Return ``(instalments, receipts)`` over the full contractual term."""
    if not account.is_open:
        raise PreconditionError(f"account {account.account_id} is closed; closed accounts are not forecast")
    t0, tc = account.t0, account.contractual_term
    if t0 >= tc:
        raise NothingToForecastError(f"account {account.account_id} is observed to term")
    ctx = AmortContext.from_balance(float(account.balances[-1]), account.annual_interest_rate, tc - t0)
    n = tc - t0
    future_inst = np.full(n, ctx.level_instalment)
    forecast = random_receipts(future_inst, params.b, rng.random(n))

    inst = np.concatenate([account.instalments, future_inst])
    rec = np.concatenate([account.receipts, forecast])
    if math.isfinite(k_draw):
        hist_levels = list(account.levels(p))
        start = hist_levels[-1] if hist_levels else 0
        levels = hist_levels + g1_levels(future_inst.tolist(), forecast.tolist(), p, start)
        rec = truncate(rec, levels, k_draw, t0)
    return inst, rec
