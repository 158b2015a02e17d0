"""Forecast-completion of censored portfolios.

Open accounts observed short of their contractual term are extended to it by
one of the two techniques. Closed accounts (written off or settled) and
accounts already observed to term are kept as they are.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .amort import expected_balance_path, level_instalment
from .delinquency import DEFAULT_PAYMENT_THRESHOLD, g1_levels
from .errors import DomainError, PreconditionError
from .fitting import EXPONENTIAL
from .forecast_markov import TransitionMatrix, complete_markov, estimate_transition_matrix
from .forecast_random import RandomDefaultsParams, complete_random, draw_truncation, train_random
from .portfolio import LoanHistory, Portfolio
from .streams import FORECAST, substream

RANDOM = "random"
MARKOV = "markov"
TECHNIQUES = (RANDOM, MARKOV)

Params = Union[RandomDefaultsParams, TransitionMatrix]


@dataclass(frozen=True, eq=False)
class CompletedAccount:
    """An account's cash flows over its full horizon, history plus forecast."""

    account_id: str
    principal: float
    instalments: np.ndarray
    receipts: np.ndarray
    expected_balances: np.ndarray
    levels: np.ndarray

    @property
    def horizon(self) -> int:
        return int(self.instalments.shape[0])


@dataclass(frozen=True)
class CompletedPortfolio:
    accounts: tuple
    label: str = ""

    def __len__(self):
        return len(self.accounts)

    def __iter__(self):
        return iter(self.accounts)

    @property
    def total_principal(self) -> float:
        return float(sum(a.principal for a in self.accounts))


def technique_of(params: Params) -> str:
    if isinstance(params, RandomDefaultsParams):
        return RANDOM
    if isinstance(params, TransitionMatrix):
        return MARKOV
    raise DomainError(f"unrecognised technique parameters {type(params).__name__}")


def train(technique: str, sample: Portfolio, family: Optional[str] = EXPONENTIAL,
          p: float = DEFAULT_PAYMENT_THRESHOLD) -> Params:
    if technique == RANDOM:
        return train_random(sample, family, p)
    if technique == MARKOV:
        return estimate_transition_matrix(sample, p)
    raise DomainError(f"unknown technique {technique!r}; expected one of {TECHNIQUES}")


def contractual_balances(account: LoanHistory, horizon: int) -> np.ndarray:
    """Contractual (schedule) balance for t = 1..horizon.

    Up to t0 the origination schedule applies; afterwards the last observed
    balance is re-amortised over the remaining term. A settled account owes
    nothing from its settlement month.
    """
    rate = account.annual_interest_rate
    t0, tc = account.t0, account.contractual_term
    original = level_instalment(account.principal, rate, tc)
    hist = expected_balance_path(account.principal, rate, original, t0)
    if horizon > t0:
        b0 = float(account.balances[-1])
        tail = expected_balance_path(b0, rate, level_instalment(b0, rate, tc - t0), horizon - t0)
        hist = np.concatenate([hist, tail])
    if account.settled:
        hist[account.closure.period - 1:] = 0.0
    return hist


def build_completed(account: LoanHistory, instalments, receipts,
                    p: float = DEFAULT_PAYMENT_THRESHOLD) -> CompletedAccount:
    inst = np.asarray(instalments, dtype=float)
    rec = np.asarray(receipts, dtype=float)
    t0 = account.t0
    hist_levels = list(account.levels(p))
    if inst.shape[0] > t0:
        start = hist_levels[-1] if hist_levels else 0
        tail = g1_levels(inst[t0:].tolist(), rec[t0:].tolist(), p, start)
        levels = hist_levels + tail
    else:
        levels = hist_levels
    return CompletedAccount(
        account.account_id, account.principal, inst, rec,
        contractual_balances(account, inst.shape[0]), np.asarray(levels, dtype=np.int64),
    )


def as_observed(account: LoanHistory, p: float = DEFAULT_PAYMENT_THRESHOLD) -> CompletedAccount:
    return build_completed(account, account.instalments, account.receipts, p)


def complete_account(account: LoanHistory, params: Params, seed: int, trial: int = 0,
                     p: float = DEFAULT_PAYMENT_THRESHOLD) -> CompletedAccount:
    if not account.needs_forecast:
        return as_observed(account, p)
    rng = substream(seed, account.account_id, trial, FORECAST)
    if isinstance(params, RandomDefaultsParams):
        k = draw_truncation(params, rng)
        inst, rec = complete_random(account, params, k, rng, p)
    else:
        inst, rec, _ = complete_markov(account, params, rng, p)
    return build_completed(account, inst, rec, p)


def complete_portfolio(portfolio: Portfolio, params: Params, seed: int, trial: int = 0,
                       p: float = DEFAULT_PAYMENT_THRESHOLD) -> CompletedPortfolio:
    """Forecast-complete every account; results are ordered by account id."""
    ordered = sorted(portfolio.accounts, key=lambda a: a.account_id)
    return CompletedPortfolio(tuple(complete_account(a, params, seed, trial, p) for a in ordered),
                              portfolio.label)


def observed_portfolio(portfolio: Portfolio, p: float = DEFAULT_PAYMENT_THRESHOLD) -> CompletedPortfolio:
    """Wrap a portfolio with no forecasting; every open account must already be at term."""
    ordered = sorted(portfolio.accounts, key=lambda a: a.account_id)
    for acc in ordered:
        if acc.needs_forecast:
            raise PreconditionError(f"account {acc.account_id} is censored at t0={acc.t0} "
                                    f"< t_c={acc.contractual_term}; forecast-complete it first")
    return CompletedPortfolio(tuple(as_observed(a, p) for a in ordered), portfolio.label)
