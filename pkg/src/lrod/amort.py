"""Level-instalment amortisation, contractual balances, arrears and discounting.

Client interest uses the nominal-annual / 12 convention. Risk-free discounting
uses an effective annual rate, so twelve months discount by exactly
``1 / (1 + rate)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

CURRENCY_TOL = 0.01


def level_instalment(balance: float, annual_rate: float, n: int) -> float:
    """Instalment that amortises ``balance`` to zero over ``n`` months."""
    if balance < 0:
        raise DomainError(f"balance must be non-negative, got {balance}")
    if n < 1:
        if balance > 0:
            raise DomainError("cannot amortise a positive balance over zero months")
        return 0.0
    if balance == 0:
        return 0.0
    r = annual_rate / 12.0
    if r == 0:
        return balance / n
    # expm1/log1p keep the annuity factor accurate for very small rates.
    return balance * r / -math.expm1(-n * math.log1p(r))


def expected_balance(balance0: float, annual_rate: float, instalment: float, t: int) -> float:
    """Contractual balance after ``t`` level payments, floored at zero."""
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    r = annual_rate / 12.0
    if r == 0:
        value = balance0 - t * instalment
    else:
        excess = math.expm1(t * math.log1p(r))
        value = balance0 + balance0 * excess - instalment * excess / r
    return max(0.0, value)


def expected_balance_path(balance0: float, annual_rate: float, instalment: float, n: int) -> np.ndarray:
    """Vector of ``expected_balance`` for t = 1..n."""
    t = np.arange(1, n + 1, dtype=float)
    r = annual_rate / 12.0
    if r == 0:
        values = balance0 - t * instalment
    else:
        excess = np.expm1(t * np.log1p(r))
        values = balance0 + balance0 * excess - instalment * excess / r
    return np.maximum(values, 0.0)


def arrears_series(instalments, receipts) -> np.ndarray:
    """Floored cumulative shortfall ``A_t = max(0, A_{t-1} + I_t - R_t)``."""
    inst = np.asarray(instalments, dtype=float)
    rec = np.asarray(receipts, dtype=float)
    if inst.shape != rec.shape:
        raise DomainError("instalment and receipt series differ in length")
    out = np.empty(inst.shape[0])
    a = 0.0
    for i, (due, paid) in enumerate(zip(inst.tolist(), rec.tolist())):
        a = a + due - paid
        if a < 0.0:
            a = 0.0
        out[i] = a
    return out


def arrears(instalments, receipts, t: int) -> float:
    """Accumulated arrears at period ``t`` (1-based)."""
    series = arrears_series(instalments, receipts)
    if not 1 <= t <= series.shape[0]:
        raise DomainError(f"period {t} outside 1..{series.shape[0]}")
    return float(series[t - 1])


def monthly_discount(annual_rate: float) -> float:
    return (1.0 + annual_rate) ** (-1.0 / 12.0)


def discount_factor(t: int, annual_rate: float) -> float:
    """Discount from period ``t`` back to origination (t = 1)."""
    if t < 1:
        raise DomainError(f"discounting requires t >= 1, got {t}")
    return monthly_discount(annual_rate) ** (t - 1)


def discount_vector(n: int, annual_rate: float) -> np.ndarray:
    """Discount factors for t = 1..n."""
    return monthly_discount(annual_rate) ** np.arange(n, dtype=float)


@dataclass(frozen=True)
class AmortContext:
    """Re-amortisation of the last observed balance over the remaining term."""

    balance_at_t0: float
    annual_rate: float
    remaining_term: int
    level_instalment: float

    @classmethod
    def from_balance(cls, balance: float, annual_rate: float, remaining_term: int) -> "AmortContext":
        return cls(balance, annual_rate, remaining_term,
                   level_instalment(balance, annual_rate, remaining_term))

    @property
    def monthly_rate(self) -> float:
        return self.annual_rate / 12.0

    def closes(self) -> bool:
        """True if the schedule runs the balance down to zero at term."""
        b = self.balance_at_t0
        r = self.monthly_rate
        for _ in range(self.remaining_term):
            b = b * (1.0 + r) - self.level_instalment
        return abs(b) <= CURRENCY_TOL
