"""Exact binomial tail probabilities and their confidence-limit inversions.

Tails are summed in log space over the shorter side of the distribution;
limits are found by bisection on the tail value. Everything here is plain
numpy so the statistical tests can cross-check against an independent
(beta-quantile) route.
"""

from __future__ import annotations

import functools
import math

import numpy as np

from .errors import InvalidParameterError

LEVEL_TOLERANCE = 1e-10


@functools.lru_cache(maxsize=8)
def _log_factorials(m: int) -> np.ndarray:
    # log(i!) for i = 0..m
    out = np.zeros(m + 1)
    if m >= 1:
        out[1:] = np.cumsum(np.log(np.arange(1, m + 1, dtype=np.float64)))
    return out


def _log_binom_sum(lo: int, hi: int, m: int, p: float) -> float:
    """log sum_{i=lo..hi} C(m,i) p^i (1-p)^(m-i), summed stably."""
    lf = _log_factorials(m)
    i = np.arange(lo, hi + 1, dtype=np.float64)
    logs = (
        lf[m]
        - lf[lo : hi + 1]
        - lf[m - hi : m - lo + 1][::-1]
        + i * math.log(p)
        + (m - i) * math.log1p(-p)
    )
    top = logs.max()
    return float(top + np.log(np.exp(logs - top).sum()))


def binom_cdf(k: int, m: int, p: float) -> float:
    """P(X <= k) for X ~ Binomial(m, p)."""
    if k < 0:
        return 0.0
    if k >= m:
        return 1.0
    if p <= 0.0:
        return 1.0
    if p >= 1.0:
        return 0.0
    if k + 1 <= m - k:
        return min(1.0, math.exp(_log_binom_sum(0, k, m, p)))
    return max(0.0, 1.0 - math.exp(_log_binom_sum(k + 1, m, m, p)))


def binom_sf(k: int, m: int, p: float) -> float:
    """P(X >= k) for X ~ Binomial(m, p)."""
    return 1.0 - binom_cdf(k - 1, m, p)


def _check(k: int, m: int, confidence: float) -> None:
    if m < 1 or k < 0 or k > m:
        raise InvalidParameterError(f"need 0 <= k <= m, got k={k}, m={m}")
    if not 0.0 < confidence < 1.0:
        raise InvalidParameterError(f"need 0 < confidence < 1, got {confidence}")


def binom_upper_limit(k: int, m: int, confidence: float) -> float:
    """One-sided upper confidence limit on a Bernoulli mean.

    Smallest p with P(X <= k; m, p) <= 1 - confidence, found by bisection
    to within LEVEL_TOLERANCE on the tail level.
    """
    _check(k, m, confidence)
    if k >= m:
        return 1.0
    alpha = 1.0 - confidence
    lo, hi = k / m, 1.0
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        level = binom_cdf(k, m, mid)
        if abs(level - alpha) <= LEVEL_TOLERANCE:
            return mid if level <= alpha else hi
        if level > alpha:
            lo = mid
        else:
            hi = mid
    return hi


def binom_lower_limit(k: int, m: int, confidence: float) -> float:
    """One-sided lower confidence limit: largest p with P(X >= k; m, p) <= 1 - confidence."""
    _check(k, m, confidence)
    if k <= 0:
        return 0.0
    alpha = 1.0 - confidence
    lo, hi = 0.0, k / m
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        level = binom_sf(k, m, mid)
        if abs(level - alpha) <= LEVEL_TOLERANCE:
            return mid if level <= alpha else lo
        if level > alpha:
            hi = mid
        else:
            lo = mid
    return lo


def clopper_pearson(k: int, m: int, confidence: float) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval for k successes in m trials."""
    _check(k, m, confidence)
    half = 1.0 - (1.0 - confidence) / 2.0
    low = binom_lower_limit(k, m, half)
    high = binom_upper_limit(k, m, half)
    return low, high
