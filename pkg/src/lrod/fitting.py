"""Maximum-likelihood fits for the truncation parameter k.

The exponential fit is closed-form. The two-parameter Weibull fit solves the
profile-likelihood equation in the shape,

    sum(x^c ln x) / sum(x^c) - 1/c - mean(ln x) = 0,

by Newton steps kept inside a shrinking bracket; the scale then follows in
closed form. Candidates are ranked by AIC, with the Kolmogorov-Smirnov
statistic kept alongside for diagnostics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ConvergenceError, DegenerateSampleError, DomainError

EXPONENTIAL = "Exponential"
WEIBULL = "Weibull"


@dataclass(frozen=True)
class FittedDistribution:
    family: str
    params: tuple
    log_likelihood: float
    aic: float
    ks_statistic: float
    n: int = 0

    @property
    def n_params(self) -> int:
        return len(self.params)

    def cdf(self, x):
        return cdf(self.family, self.params, x)


def _validate(maxima) -> np.ndarray:
    x = np.asarray(maxima, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("need a non-empty 1-d sample")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("all sample values must be positive and finite")
    return x


def _aic(n_params: int, loglik: float) -> float:
    return 2.0 * n_params - 2.0 * loglik


def cdf(family: str, params: Sequence[float], x):
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    if family == EXPONENTIAL:
        (rate,) = params
        return 1.0 - np.exp(-rate * x)
    if family == WEIBULL:
        scale, shape = params
        return 1.0 - np.exp(-((x / scale) ** shape))
    raise DomainError(f"unknown family {family!r}")


def _ks(family, params, x) -> float:
    return float(stats.kstest(x, lambda v: cdf(family, params, v)).statistic)


def exponential_loglik(rate: float, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.size * math.log(rate) - rate * x.sum())


def weibull_loglik(scale: float, shape: float, x) -> float:
    x = np.asarray(x, dtype=float)
    z = x / scale
    return float(x.size * (math.log(shape) - math.log(scale))
                 + (shape - 1.0) * np.log(z).sum() - (z ** shape).sum())


def fit_exponential(maxima) -> FittedDistribution:
    x = _validate(maxima)
    rate = 1.0 / float(x.mean())
    ll = exponential_loglik(rate, x)
    return FittedDistribution(EXPONENTIAL, (rate,), ll, _aic(1, ll), _ks(EXPONENTIAL, (rate,), x), x.size)


def _shape_equation(c: float, logs: np.ndarray, mean_log: float):
    # Powers are taken relative to the largest value to avoid overflow.
    w = np.exp(c * (logs - logs.max()))
    s0 = w.sum()
    s1 = (w * logs).sum()
    s2 = (w * logs * logs).sum()
    value = s1 / s0 - 1.0 / c - mean_log
    slope = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (c * c)
    return value, slope


def weibull_shape_mle(x, tol: float = 1e-8, max_iter: int = 200) -> float:
    """Root of the profile-likelihood shape equation (strictly increasing in the shape)."""
    logs = np.log(np.asarray(x, dtype=float))
    mean_log = float(logs.mean())
    sd = float(logs.std())
    c = 1.2 / sd if sd > 0 else 1.0

    lo, hi = 0.0, math.inf
    for _ in range(max_iter):
        value, slope = _shape_equation(c, logs, mean_log)
        if value > 0:
            hi = min(hi, c)
        else:
            lo = max(lo, c)
        step = value / slope
        new = c - step
        if not (lo < new < hi) or not math.isfinite(new):
            new = 0.5 * (lo + hi) if math.isfinite(hi) else 2.0 * c
        if abs(new - c) < tol:
            return float(new)
        c = new
    raise ConvergenceError(f"Weibull shape did not converge in {max_iter} iterations", last_iterate=c)


def fit_weibull(maxima, tol: float = 1e-8, max_iter: int = 200) -> FittedDistribution:
    x = _validate(maxima)
    if np.all(x == x[0]):
        raise DegenerateSampleError("Weibull fit needs at least two distinct values")
    shape = float(weibull_shape_mle(x, tol, max_iter))
    scale = float(np.mean(x ** shape) ** (1.0 / shape))
    ll = weibull_loglik(scale, shape, x)
    params = (scale, shape)
    return FittedDistribution(WEIBULL, params, ll, _aic(2, ll), _ks(WEIBULL, params, x), x.size)


FITTERS = {EXPONENTIAL: fit_exponential, WEIBULL: fit_weibull}


def select_distribution(candidates: Sequence[FittedDistribution]) -> FittedDistribution:
    """Lowest AIC wins; ties go to the earliest candidate."""
    if not candidates:
        raise DomainError("no candidate distributions")
    best = candidates[0]
    for cand in candidates[1:]:
        if cand.aic < best.aic:
            best = cand
    return best


def inverse_cdf(family: str, params: Sequence[float], u):
    u = np.asarray(u, dtype=float)
    if family == EXPONENTIAL:
        (rate,) = params
        return -np.log1p(-u) / rate
    if family == WEIBULL:
        scale, shape = params
        return scale * (-np.log1p(-u)) ** (1.0 / shape)
    raise DomainError(f"unknown family {family!r}")
