"""Deterministic synthetic mortgage portfolios.

Three payer archetypes are mixed:

* steady: pays the instalment every month;
* intermittent: misses payments now and then and catches up with lump sums
  (the curing behaviour the Markov technique is built to capture);
* deteriorating: pays steadily until a stop month, then mostly stops. A share
  of these is written off some months later, with an asset-sale recovery.

A few accounts settle early. Histories are right-censored at a random
observation month for ``censored_fraction`` of the accounts.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .amort import level_instalment
from .errors import ConfigError
from .portfolio import Closure, LoanHistory, MonthlyRecord, Portfolio, SETTLED, WRITTEN_OFF
from .streams import GENERATE, substream


@dataclass(frozen=True)
class GeneratorConfig:
    n_accounts: int = 500
    term: int = 240
    principal_min: float = 150_000.0
    principal_max: float = 900_000.0
    rate_min: float = 0.07
    rate_max: float = 0.12
    mix_steady: float = 0.60
    mix_intermittent: float = 0.25
    mix_deteriorating: float = 0.15
    writeoff_propensity: float = 0.10
    settle_propensity: float = 0.03
    censored_fraction: float = 0.90
    min_observed: int = 12
    miss_rate: float = 0.12
    cure_rate: float = 0.35
    relapse_rate: float = 0.30
    stop_miss_rate: float = 0.85
    writeoff_lag_min: int = 6
    writeoff_lag_max: int = 30
    recovery_min: float = 0.20
    recovery_max: float = 0.70
    label: str = "synthetic"

    def __post_init__(self):
        if self.n_accounts < 0:
            raise ConfigError("n_accounts", "must be >= 0")
        if self.term < 2:
            raise ConfigError("term", "must be >= 2")
        for lo, hi in (("principal_min", "principal_max"), ("rate_min", "rate_max"),
                       ("writeoff_lag_min", "writeoff_lag_max"), ("recovery_min", "recovery_max")):
            if getattr(self, lo) > getattr(self, hi):
                raise ConfigError(lo, f"{lo} exceeds {hi}")
        if self.principal_min <= 0:
            raise ConfigError("principal_min", "must be positive")
        if self.rate_min < 0:
            raise ConfigError("rate_min", "must be non-negative")
        for name in ("mix_steady", "mix_intermittent", "mix_deteriorating", "writeoff_propensity",
                     "settle_propensity", "censored_fraction", "miss_rate", "cure_rate",
                     "relapse_rate", "stop_miss_rate", "recovery_min", "recovery_max"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"must lie in [0, 1], got {value}")
        if self.cure_rate + self.relapse_rate > 1.0:
            raise ConfigError("cure_rate", "cure_rate + relapse_rate exceeds 1")
        mix = self.mix_steady + self.mix_intermittent + self.mix_deteriorating
        if not math.isclose(mix, 1.0, abs_tol=1e-9):
            raise ConfigError("mix_steady", f"payer mix sums to {mix}, not 1")
        if not 1 <= self.min_observed <= self.term:
            raise ConfigError("min_observed", "must lie in 1..term")
        if self.writeoff_lag_min < 1:
            raise ConfigError("writeoff_lag_min", "must be >= 1")

    @classmethod
    def from_mapping(cls, values: dict) -> "GeneratorConfig":
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(key, "unknown generator key")
            kind = types[key]
            try:
                if kind == "int":
                    kwargs[key] = int(raw)
                elif kind == "float":
                    kwargs[key] = float(raw)
                else:
                    kwargs[key] = str(raw)
            except (TypeError, ValueError):
                raise ConfigError(key, f"cannot parse {raw!r} as {kind}") from None
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "GeneratorConfig":
        return cls.from_mapping(read_key_values(path))

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


def read_key_values(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        out[key] = value
    return out


STEADY, INTERMITTENT, DETERIORATING = "steady", "intermittent", "deteriorating"


def _archetype(cfg: GeneratorConfig, u: float) -> str:
    if u < cfg.mix_steady:
        return STEADY
    if u < cfg.mix_steady + cfg.mix_intermittent:
        return INTERMITTENT
    return DETERIORATING


def _generate_account(cfg: GeneratorConfig, index: int, seed: int) -> LoanHistory:
    account_id = f"L{index + 1:06d}"
    rng = substream(seed, account_id, 0, GENERATE)
    principal = round(float(rng.uniform(cfg.principal_min, cfg.principal_max)), 2)
    rate = round(float(rng.uniform(cfg.rate_min, cfg.rate_max)), 4)
    archetype = _archetype(cfg, float(rng.random()))
    censored = rng.random() < cfg.censored_fraction
    t0 = int(rng.integers(cfg.min_observed, cfg.term)) if censored and cfg.min_observed < cfg.term else cfg.term
    instalment = round(level_instalment(principal, rate, cfg.term), 2)

    # Decide the closure event before simulating, so every draw below is
    # consumed in a fixed order regardless of outcome.
    u_writeoff = float(rng.random())
    lag = int(rng.integers(cfg.writeoff_lag_min, cfg.writeoff_lag_max + 1))
    u_stop = float(rng.random())
    u_settle = float(rng.random())
    u_settle_time = float(rng.random())
    recovery_frac = float(rng.uniform(cfg.recovery_min, cfg.recovery_max))
    behaviour = rng.random(cfg.term)
    extra = rng.random(cfg.term)

    stop = None
    writeoff_at = None
    settle_at = None
    if archetype == DETERIORATING:
        p_writeoff = min(1.0, cfg.writeoff_propensity / cfg.mix_deteriorating) if cfg.mix_deteriorating else 0.0
        if u_writeoff < p_writeoff and t0 - lag >= 1:
            stop = 1 + int(u_stop * (t0 - lag))
            writeoff_at = stop + lag
            t0 = writeoff_at
        else:
            stop = 1 + int(u_stop * t0)
    if writeoff_at is None and u_settle < cfg.settle_propensity:
        settle_at = 1 + int(u_settle_time * t0)
        t0 = settle_at

    r = rate / 12.0
    balance = principal
    missed = 0
    records = []
    recovery = 0.0
    for t in range(1, t0 + 1):
        u = float(behaviour[t - 1])
        if archetype == STEADY:
            paid = instalment
        elif archetype == INTERMITTENT:
            if missed == 0:
                if u < cfg.miss_rate:
                    paid, missed = 0.0, 1
                else:
                    paid = instalment
            elif u < cfg.cure_rate:
                catch_up = 1 + int(float(extra[t - 1]) * missed)
                paid = instalment * (1 + catch_up)
                missed -= catch_up
            elif u < cfg.cure_rate + cfg.relapse_rate:
                paid, missed = 0.0, missed + 1
            else:
                paid = instalment
        else:
            if t < stop:
                paid = instalment
            elif u < cfg.stop_miss_rate:
                paid = 0.0
            elif u < cfg.stop_miss_rate + 0.5 * (1.0 - cfg.stop_miss_rate):
                paid = round(0.5 * instalment, 2)
            else:
                paid = 2.0 * instalment
        accrued = balance * (1.0 + r)
        if t == settle_at:
            paid = accrued
        paid = round(min(paid, accrued), 2)
        balance = round(max(0.0, accrued - paid), 2)
        if t == writeoff_at:
            recovery = round(recovery_frac * balance, 2)
        records.append(MonthlyRecord(t, instalment, paid, balance))
        if balance == 0.0 and writeoff_at is None and t < cfg.term:
            # Paid off ahead of schedule: the contract ends here.
            settle_at = t
            break

    if writeoff_at is not None:
        closure = Closure(WRITTEN_OFF, writeoff_at, recovery)
    elif settle_at is not None:
        closure = Closure(SETTLED, settle_at)
    else:
        closure = Closure()
    return LoanHistory(account_id, cfg.term, principal, rate, tuple(records), closure)


def generate_synthetic_portfolio(cfg: GeneratorConfig, seed: int) -> Portfolio:
    """Deterministic in ``(cfg, seed)``; account ``i`` depends only on its own substream."""
    accounts = tuple(_generate_account(cfg, i, seed) for i in range(cfg.n_accounts))
    return Portfolio(accounts, cfg.label)


# Portfolio used by the interior-minimum and negative-control checks. A 10-year
# book keeps the runs quick while leaving most contractual cash flows unobserved.
DESIGNED_SEED = 20201
DESIGNED_CONFIG = GeneratorConfig(
    n_accounts=400,
    term=120,
    principal_min=150_000.0,
    principal_max=900_000.0,
    mix_steady=0.50,
    mix_intermittent=0.30,
    mix_deteriorating=0.20,
    writeoff_propensity=0.10,
    censored_fraction=0.95,
    min_observed=12,
    label="designed",
)


def designed_portfolio(**overrides) -> Portfolio:
    cfg = replace(DESIGNED_CONFIG, **overrides) if overrides else DESIGNED_CONFIG
    return generate_synthetic_portfolio(cfg, DESIGNED_SEED)
