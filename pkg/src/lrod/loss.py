"""Loss-based recovery optimisation across delinquency thresholds.

For a threshold d an account defaults at its first period with g1 >= d and
its loss is assessed there; otherwise it is assessed at the end of its
horizon. The account-level loss is the discounted weighted sum of contractual
balance and arrears. Sweeping d over a grid and taking the argmin gives the
loss-optimal recovery threshold.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .amort import arrears_series, discount_factor, discount_vector
from .completion import (
    CompletedAccount, CompletedPortfolio, MARKOV, RANDOM, Params, complete_portfolio,
    observed_portfolio, technique_of, train,
)
from .delinquency import DEFAULT_PAYMENT_THRESHOLD, first_breach_indices
from .errors import ConfigError, DomainError, LrodError, ScenarioError
from .fitting import EXPONENTIAL, WEIBULL
from .portfolio import Portfolio, SamplePartition

SAMPLES = ("S1", "S2", "S3")
CI_Z99 = 2.58


@dataclass(frozen=True)
class LossConfig:
    r_E: float = 0.40
    r_A: float = 0.70
    risk_free_rate: float = 0.07
    grid: tuple = tuple(range(1, 61))
    measure: str = "g1"
    payment_threshold: float = DEFAULT_PAYMENT_THRESHOLD

    def __post_init__(self):
        for name in ("r_E", "r_A"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1]")
        if self.risk_free_rate <= -1.0:
            raise DomainError("risk-free rate must exceed -100%")
        grid = tuple(self.grid)
        if not grid:
            raise DomainError("threshold grid is empty")
        if grid[0] < 1:
            raise DomainError("thresholds must be >= 1")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("threshold grid must be strictly increasing")
        if not 0.0 < self.payment_threshold <= 1.0:
            raise DomainError("payment_threshold must lie in (0, 1]")
        if self.measure != "g1":
            raise DomainError(f"unsupported delinquency measure {self.measure!r}")
        object.__setattr__(self, "grid", grid)

    @classmethod
    def from_mapping(cls, values: dict) -> "LossConfig":
        """Build from ``key = value`` strings; the grid uses ``parse_grid`` syntax."""
        kwargs = {}
        for key, raw in values.items():
            try:
                if key in ("r_E", "r_A", "risk_free_rate", "payment_threshold"):
                    kwargs[key] = float(raw)
                elif key == "grid":
                    kwargs[key] = parse_grid(str(raw))
                elif key == "measure":
                    kwargs[key] = str(raw)
                else:
                    raise ConfigError(key, "unknown loss-model key")
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(key, f"cannot parse {raw!r}") from None
        try:
            return cls(**kwargs)
        except DomainError as exc:
            raise ConfigError(_offending_key(str(exc), kwargs), str(exc)) from None


def _offending_key(message: str, kwargs: dict) -> str:
    for key in kwargs:
        if key in message:
            return key
    return "grid" if "threshold" in message else next(iter(kwargs), "config")


def parse_grid(text: str) -> tuple:
    """``"1..60"`` (inclusive integer range) or a comma list of thresholds."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(float(v) if "." in v else int(v) for v in text.split(","))


@dataclass(frozen=True, eq=False)
class LossCurve:
    thresholds: tuple
    losses: np.ndarray
    denominator: float
    label: str = ""

    @property
    def minimum_loss(self) -> float:
        return float(self.losses.min())

    @property
    def optimal_index(self) -> int:
        return int(np.argmin(self.losses))

    @property
    def optimal_threshold(self):
        return self.thresholds[self.optimal_index]

    @property
    def loss_rates(self) -> np.ndarray:
        if self.denominator <= 0:
            return np.full_like(self.losses, np.nan)
        return self.losses / self.denominator

    def rows(self):
        for d, loss, rate in zip(self.thresholds, self.losses.tolist(), self.loss_rates.tolist()):
            yield d, loss, rate


def _as_completed(portfolio, cfg: LossConfig) -> CompletedPortfolio:
    if isinstance(portfolio, CompletedPortfolio):
        return portfolio
    return observed_portfolio(portfolio, cfg.payment_threshold)


def loss_vector(account: CompletedAccount, cfg: LossConfig) -> np.ndarray:
    """Discounted loss ``l(i, t)`` for every t = 1..horizon."""
    arrears = arrears_series(account.instalments, account.receipts)
    df = discount_vector(account.horizon, cfg.risk_free_rate)
    return df * (cfg.r_E * account.expected_balances + cfg.r_A * arrears)


def account_loss(account: CompletedAccount, t: int, cfg: LossConfig) -> float:
    if not 1 <= t <= account.horizon:
        raise DomainError(f"period {t} outside 1..{account.horizon} for account {account.account_id}")
    arrears = float(arrears_series(account.instalments[:t], account.receipts[:t])[-1])
    balance = float(account.expected_balances[t - 1])
    return discount_factor(t, cfg.risk_free_rate) * (cfg.r_E * balance + cfg.r_A * arrears)


def assessment_period(account: CompletedAccount, d: float) -> Tuple[int, bool]:
    """(period, defaulted): first breach of d, else the end of the horizon."""
    hits = np.flatnonzero(account.levels >= d)
    if hits.size:
        return int(hits[0]) + 1, True
    return account.horizon, False


def portfolio_loss(portfolio, d: float, cfg: LossConfig) -> float:
    cp = _as_completed(portfolio, cfg)
    total = 0.0
    for acc in cp:
        t, _ = assessment_period(acc, d)
        total += account_loss(acc, t, cfg)
    return total


def curve_values(portfolio, cfg: LossConfig, grid: Optional[Sequence[float]] = None) -> np.ndarray:
    """``L(d)`` for every threshold, accumulated account by account in id order."""
    cp = _as_completed(portfolio, cfg)
    grid = cfg.grid if grid is None else tuple(grid)
    total = np.zeros(len(grid))
    for acc in cp:
        lv = loss_vector(acc, cfg)
        idx = first_breach_indices(acc.levels, grid)
        total += np.where(idx >= 0, lv[idx], lv[-1])
    return total


def segment_sizes(portfolio, cfg: LossConfig) -> np.ndarray:
    """Number of defaulting accounts at each threshold."""
    cp = _as_completed(portfolio, cfg)
    counts = np.zeros(len(cfg.grid), dtype=np.int64)
    for acc in cp:
        counts += first_breach_indices(acc.levels, cfg.grid) >= 0
    return counts


def optimise_thresholds(portfolio, cfg: LossConfig) -> LossCurve:
    cp = _as_completed(portfolio, cfg)
    return LossCurve(cfg.grid, curve_values(cp, cfg), cp.total_principal, cp.label)


# -- scenario matrix --------------------------------------------------------

def truncation_family(train_sample: str) -> str:
    """Exponential truncation when training on S1/S2, Weibull on S3."""
    return WEIBULL if train_sample.upper() == "S3" else EXPONENTIAL


@dataclass
class ScenarioGrid:
    technique: str
    cells: Dict[Tuple[str, str], LossCurve] = field(default_factory=dict)
    errors: Dict[Tuple[str, str], str] = field(default_factory=dict)
    params: Dict[str, Params] = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return len(self.cells) == len(SAMPLES) ** 2

    def optima(self):
        for (i, j), curve in sorted(self.cells.items()):
            yield i, j, curve.minimum_loss, float(curve.loss_rates[curve.optimal_index]), curve.optimal_threshold


def parse_cells(text: str):
    """``"all"`` or a single ``"i,j"`` pair such as ``"1,1"`` or ``"S3,S1"``."""
    if text.strip().lower() == "all":
        return [(i, j) for i in SAMPLES for j in SAMPLES]
    parts = [s.strip().upper() for s in text.split(",")]
    if len(parts) != 2:
        raise DomainError(f"scenario must be 'all' or 'i,j', got {text!r}")
    cell = tuple(p if p.startswith("S") else f"S{p}" for p in parts)
    if any(c not in SAMPLES for c in cell):
        raise DomainError(f"scenario samples must be among {SAMPLES}, got {text!r}")
    return [cell]


def run_scenario_cell(params: Params, target: Portfolio, cfg: LossConfig, seed: int) -> LossCurve:
    if len(target) == 0:
        raise ScenarioError(f"optimisation sample {target.label or '?'} is empty")
    cp = complete_portfolio(target, params, seed, 0, cfg.payment_threshold)
    return optimise_thresholds(cp, cfg)


def run_scenario_matrix(partition: SamplePartition, technique: str, cfg: LossConfig, seed: int,
                        cells=None, params: Optional[Dict[str, Params]] = None) -> ScenarioGrid:
    """Train on S_i, forecast-complete and optimise on S_j, for every requested cell.

    Cells that cannot be computed are recorded in ``errors``; the rest proceed.
    """
    cells = cells if cells is not None else [(i, j) for i in SAMPLES for j in SAMPLES]
    grid = ScenarioGrid(technique)
    trained = dict(params or {})
    for i, j in cells:
        try:
            if i not in trained:
                sample = partition[i]
                if len(sample) == 0:
                    raise ScenarioError(f"training sample {i} is empty")
                family = truncation_family(i) if technique == RANDOM else None
                trained[i] = train(technique, sample, family, cfg.payment_threshold)
            grid.params[i] = trained[i]
            target = partition[j]
            curve = run_scenario_cell(trained[i], target, cfg, seed)
            grid.cells[(i, j)] = LossCurve(curve.thresholds, curve.losses, curve.denominator,
                                           f"s{i[1]}{j[1]}")
        except LrodError as exc:
            grid.errors[(i, j)] = str(exc)
    return grid


# -- Monte Carlo refinement -------------------------------------------------

@dataclass(frozen=True, eq=False)
class McSummary:
    """Per-threshold statistics of loss rates (fractions of summed principal)."""

    n_trials: int
    thresholds: tuple
    mean: np.ndarray
    var: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    mean_loss: np.ndarray
    denominator: float
    samples: np.ndarray = field(repr=False, default=None)

    @property
    def optimal_index(self) -> int:
        return int(np.argmin(self.mean))

    @property
    def optimal_threshold(self):
        return self.thresholds[self.optimal_index]

    @property
    def minimum_mean(self) -> float:
        return float(self.mean[self.optimal_index])

    @property
    def ci_width(self) -> np.ndarray:
        return self.ci_high - self.ci_low

    def rows(self):
        cols = (self.mean_loss, self.mean, self.mean, self.var, self.ci_low, self.ci_high)
        for d, *vals in zip(self.thresholds, *(c.tolist() for c in cols)):
            yield (d, *vals)


def summarise_trials(samples: np.ndarray, thresholds, denominator: float) -> McSummary:
    """Mean, sample variance and 99% band ``mean +/- 2.58 s / sqrt(n)`` per threshold."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n < 2:
        raise DomainError("Monte Carlo summary needs at least two trials")
    mean = samples.mean(axis=0)
    var = samples.var(axis=0, ddof=1)
    var[np.ptp(samples, axis=0) == 0] = 0.0
    half = CI_Z99 * np.sqrt(var) / math.sqrt(n)
    return McSummary(n, tuple(thresholds), mean, var, mean - half, mean + half,
                     mean * denominator, denominator, samples)


def monte_carlo_optimise(portfolio: Portfolio, params: Params, cfg: LossConfig, n: int, seed: int,
                         threads: int = 1) -> McSummary:
    """``n`` independent forecast-then-sweep trials.

    Trial ``k`` draws from substreams keyed by ``k``, so the summary is
    identical for any worker count.
    """
    if n < 2:
        raise DomainError("Monte Carlo needs n >= 2 trials")
    denominator = portfolio.total_principal
    if denominator <= 0:
        raise DomainError("portfolio has no principal to normalise losses")

    def one_trial(k: int) -> np.ndarray:
        cp = complete_portfolio(portfolio, params, seed, k, cfg.payment_threshold)
        return curve_values(cp, cfg) / denominator

    if threads <= 1:
        rows = [one_trial(k) for k in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_trial, range(n)))
    return summarise_trials(np.vstack(rows), cfg.grid, denominator)


# -- untreated portfolio, static loss rates ---------------------------------

def static_base_curve(portfolio: Portfolio, cfg: LossConfig) -> np.ndarray:
    """Discounted observed balance at first breach (defaulters) or at t0 (performers)."""
    total = np.zeros(len(cfg.grid))
    for acc in sorted(portfolio.accounts, key=lambda a: a.account_id):
        if acc.t0 == 0:
            continue
        values = acc.balances * discount_vector(acc.t0, cfg.risk_free_rate)
        idx = first_breach_indices(acc.levels(cfg.payment_threshold), cfg.grid)
        total += np.where(idx >= 0, values[idx], values[-1])
    return total


def static_rate_loss_curve(portfolio: Portfolio, loss_rates: Sequence[float], cfg: LossConfig) -> dict:
    for rate in loss_rates:
        if not 0.0 <= rate <= 1.0:
            raise DomainError(f"static loss rate must lie in [0, 1], got {rate}")
    base = static_base_curve(portfolio, cfg)
    denom = portfolio.total_principal
    return {rate: LossCurve(cfg.grid, rate * base, denom, f"static_{rate:g}") for rate in loss_rates}
