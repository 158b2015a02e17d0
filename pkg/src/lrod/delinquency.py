"""Contractual delinquency (g1): weighted payments in arrears.

The level rises by one whenever the repayment ratio falls below the payment
threshold, holds for a full (or near-full) payment, and falls by one for every
whole extra instalment paid. This is the exact inverse of the Markov receipt
reconstruction in :mod:`lrod.forecast_markov`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

DEFAULT_PAYMENT_THRESHOLD = 0.9

# R = n * I computed in floating point may land a hair under n * I.
_RATIO_EPS = 1e-9


@dataclass(frozen=True)
class DelinquencyProfile:
    levels: tuple

    def __post_init__(self):
        if any(v < 0 for v in self.levels):
            raise DomainError("delinquency levels must be non-negative")

    @property
    def max_level(self) -> int:
        return max_delinquency(self)

    def __len__(self):
        return len(self.levels)


def repayment_ratio(receipt: float, instalment: float) -> float:
    """``R_t / I_t``; a month with nothing owed counts as fully paid."""
    if receipt < 0 or instalment < 0:
        raise DomainError("receipt and instalment must be non-negative")
    if instalment == 0:
        return 1.0
    return receipt / instalment


def g1_levels(instalments: Sequence[float], receipts: Sequence[float],
              p: float = DEFAULT_PAYMENT_THRESHOLD, start_level: int = 0) -> list:
    """Raw recursion behind :func:`measure_g1`; no validation, plain lists."""
    levels = []
    g = start_level
    for due, paid in zip(instalments, receipts):
        h = 1.0 if due == 0 else paid / due
        if h < p:
            g += 1
        else:
            cure = math.floor(h + _RATIO_EPS) - 1
            if cure > 0:
                g = g - cure if g > cure else 0
        levels.append(g)
    return levels


def measure_g1(instalments, receipts, p: float = DEFAULT_PAYMENT_THRESHOLD,
               start_level: int = 0) -> DelinquencyProfile:
    """Measure g1 across a receipt/instalment series.

    ``start_level`` is g1 just before the first period (0 at origination); it
    lets a forecast tail be measured as a continuation of an observed history.
    """
    inst = list(map(float, instalments))
    rec = list(map(float, receipts))
    if len(inst) != len(rec):
        raise DomainError(f"series lengths differ: {len(inst)} instalments, {len(rec)} receipts")
    if not 0 < p <= 1:
        raise DomainError(f"payment threshold must lie in (0, 1], got {p}")
    if any(v < 0 for v in inst) or any(v < 0 for v in rec):
        raise DomainError("receipts and instalments must be non-negative")
    return DelinquencyProfile(tuple(g1_levels(inst, rec, p, start_level)))


def default_time(profile: DelinquencyProfile, d: float) -> Optional[int]:
    """Earliest 1-based period with ``g1 >= d``, or None if never breached."""
    for t, level in enumerate(profile.levels, start=1):
        if level >= d:
            return t
    return None


def max_delinquency(profile: DelinquencyProfile) -> int:
    if not profile.levels:
        raise DomainError("empty delinquency profile")
    return max(profile.levels)


def delta_series(profile: DelinquencyProfile) -> list:
    """One-period differences, taking g1(0) = 0."""
    prev = 0
    out = []
    for level in profile.levels:
        out.append(level - prev)
        prev = level
    return out


def first_breach_indices(levels, thresholds) -> np.ndarray:
    """0-based first index with ``level >= d`` for each threshold, -1 if never.

    The running maximum of a g1 profile is non-decreasing, so one sorted search
    serves every threshold at once.
    """
    running = np.maximum.accumulate(np.asarray(levels, dtype=float))
    thr = np.asarray(thresholds, dtype=float)
    idx = np.searchsorted(running, thr, side="left")
    return np.where(idx < running.shape[0], idx, -1)
