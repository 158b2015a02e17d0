"""Forecast-quality diagnostics: portfolio arrears rate, k-fold
cross-validation and parameter stability.

Validation forecasts replace each held-out account's whole observed window,
starting from its first period, and compare the implied arrears rate with
the one implied by the actual receipts.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .amort import discount_vector
from .completion import MARKOV, RANDOM, TECHNIQUES, Params, technique_of, train
from .delinquency import DEFAULT_PAYMENT_THRESHOLD, g1_levels
from .errors import DomainError
from .fitting import EXPONENTIAL
from .forecast_markov import markov_receipts, simulate_state_path
from .forecast_random import draw_truncation, random_receipts, truncate
from .portfolio import LoanHistory, Portfolio
from .streams import FOLDS, VALIDATE, substream

DEFAULT_PAR_RATE = 0.07


@dataclass(frozen=True)
class ValidationReport:
    technique: str
    par_forecast: float
    par_actual: float
    mean_param_pct_diff: float
    folds: int
    fold_par_forecast: tuple = ()
    fold_par_actual: tuple = ()
    fold_sizes: tuple = ()

    def __post_init__(self):
        if self.folds < 2:
            raise DomainError("cross-validated reports need k >= 2")

    @property
    def par_gap(self) -> float:
        """Absolute distance between forecast and actual PAR."""
        return abs(self.par_forecast - self.par_actual)

    def to_dict(self) -> dict:
        return asdict(self)


def par_metric(instalments: Sequence, receipts: Sequence, rate: float, gross_advances: float) -> float:
    """Discounted shortfalls ``sum_i sum_t v^(t-1) (I_t - R_t)`` over gross advances."""
    if gross_advances <= 0:
        raise DomainError("gross advances must be positive")
    if len(instalments) != len(receipts):
        raise DomainError("instalment and receipt lists cover different numbers of accounts")
    total = []
    for inst, rec in zip(instalments, receipts):
        inst = np.asarray(inst, dtype=float)
        rec = np.asarray(rec, dtype=float)
        if inst.shape != rec.shape:
            raise DomainError("instalment and receipt series differ in length")
        if inst.size:
            total.append(float(discount_vector(inst.size, rate) @ (inst - rec)))
    return math.fsum(total) / gross_advances


def assign_folds(n: int, k: int, seed: int) -> list:
    """Seeded shuffle of ``range(n)`` cut into k folds whose sizes differ by at most one."""
    if k < 2:
        raise DomainError("need at least two folds")
    if k > n:
        raise DomainError(f"cannot cut {n} accounts into {k} folds")
    order = substream(seed, "", 0, FOLDS).permutation(n)
    return [np.sort(part).tolist() for part in np.array_split(order, k)]


def actual_receipts(account: LoanHistory) -> np.ndarray:
    # Recorded receipts only; write-off recoveries are not a repayment behaviour.
    return np.array([r.receipt for r in account.records], dtype=float)


def window_forecast(account: LoanHistory, params: Params, rng,
                    p: float = DEFAULT_PAYMENT_THRESHOLD) -> np.ndarray:
    """Forecast receipts for t = 1..t0 against the observed instalments."""
    inst = account.instalments
    if technique_of(params) == RANDOM:
        k = draw_truncation(params, rng)
        rec = random_receipts(inst, params.b, rng.random(inst.size))
        if math.isfinite(k):
            rec = truncate(rec, g1_levels(inst.tolist(), rec.tolist(), p), k, 1)
        return rec
    path = simulate_state_path(0, params, inst.size, rng)
    return markov_receipts(0, path, inst)


def parameter_stability(full, folds: Sequence) -> float:
    """Mean relative difference ``(fold - full) / full`` over folds and parameters.

    Parameters estimated as exactly zero on the full data are left out.
    """
    full_vec = np.asarray(full.vector() if hasattr(full, "vector") else full, dtype=float)
    keep = full_vec != 0
    if not keep.any():
        raise DomainError("every full-data parameter is zero; stability is undefined")
    if not folds:
        raise DomainError("no fold parameters given")
    diffs = []
    for fold in folds:
        vec = np.asarray(fold.vector() if hasattr(fold, "vector") else fold, dtype=float)
        if vec.shape != full_vec.shape:
            raise DomainError("fold and full parameter vectors differ in dimension")
        diffs.extend(((vec[keep] - full_vec[keep]) / full_vec[keep]).tolist())
    return math.fsum(diffs) / len(diffs)


def cross_validate(portfolio: Portfolio, technique: str, k: int = 5, seed: int = 0,
                   rate: float = DEFAULT_PAR_RATE, p: float = DEFAULT_PAYMENT_THRESHOLD,
                   family: Optional[str] = EXPONENTIAL) -> ValidationReport:
    """k-fold cross-validated PAR of one technique's window forecasts.

    Folds depend on ``seed`` only, so two techniques validated with the same
    seed see the same folds.
    """
    if technique not in TECHNIQUES:
        raise DomainError(f"unknown technique {technique!r}")
    accounts = sorted(portfolio.accounts, key=lambda a: a.account_id)
    folds = assign_folds(len(accounts), k, seed)
    fam = family if technique == RANDOM else None
    full = train(technique, Portfolio(tuple(accounts)), fam, p)

    par_f, par_a, fold_params = [], [], []
    for f, held in enumerate(folds):
        held_set = set(held)
        training = Portfolio(tuple(a for i, a in enumerate(accounts) if i not in held_set))
        params = train(technique, training, fam, p)
        fold_params.append(params)
        test = [accounts[i] for i in held]
        advances = math.fsum(a.principal for a in test)
        inst = [a.instalments for a in test]
        forecast = [window_forecast(a, params, substream(seed, a.account_id, f, VALIDATE), p) for a in test]
        par_f.append(par_metric(inst, forecast, rate, advances))
        par_a.append(par_metric(inst, [actual_receipts(a) for a in test], rate, advances))

    return ValidationReport(
        technique, math.fsum(par_f) / k, math.fsum(par_a) / k,
        parameter_stability(full, fold_params), k,
        tuple(par_f), tuple(par_a), tuple(len(h) for h in folds),
    )


def compare_techniques(portfolio: Portfolio, k: int = 5, seed: int = 0, **kwargs) -> dict:
    return {t: cross_validate(portfolio, t, k, seed, **kwargs) for t in TECHNIQUES}


def format_reports(reports: dict) -> str:
    """Plain-text table with one column per technique."""
    names = {RANDOM: "Random defaults", MARKOV: "Markovian defaults"}
    cols = [t for t in TECHNIQUES if t in reports]
    rows = [
        ("Portfolio Arrears Rate (PAR)", lambda r: r.par_forecast),
        ("Actual PAR", lambda r: r.par_actual),
        ("Mean parameter %-difference", lambda r: r.mean_param_pct_diff),
    ]
    width = 30
    lines = [f"{'Metric':<{width}}" + "".join(f"{names[c]:>22}" for c in cols)]
    for label, get in rows:
        lines.append(f"{label:<{width}}" + "".join(f"{100 * get(reports[c]):>21.4f}%" for c in cols))
    k = next(iter(reports.values())).folds
    lines.append(f"({k}-fold cross-validation, averages over folds)")
    return "\n".join(lines)


def reports_json(reports: dict) -> str:
    return json.dumps({t: r.to_dict() for t, r in reports.items()}, indent=2)
