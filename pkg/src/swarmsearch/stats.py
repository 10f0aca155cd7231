"""Rank-based two-sample tests, normal approximation with tie correction."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import StatisticsInputError


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def rankdata(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = 0.5 * (i + j) + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def _tie_term(values: Sequence[float]) -> float:
    return float(sum(t ** 3 - t for t in Counter(values).values()))


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float  # U statistic of the first sample
    p_value: float
    z: float


def mann_whitney_u(x: Sequence[float], y: Sequence[float], continuity: bool = True) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    Uses the normal approximation with the tie-corrected variance and, by
    default, a 0.5 continuity correction.
    """
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise StatisticsInputError("both samples must be non-empty")
    pooled = list(x) + list(y)
    ranks = rankdata(pooled)
    r1 = math.fsum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2.0
    n = n1 + n2
    mu = n1 * n2 / 2.0
    var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(pooled) / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0.0:
        return MannWhitneyResult(u1, 1.0, 0.0)
    dev = abs(u1 - mu) - (0.5 if continuity else 0.0)
    z = max(dev, 0.0) / math.sqrt(var)
    return MannWhitneyResult(u1, min(1.0, 2.0 * _norm_sf(z)), math.copysign(z, u1 - mu))


@dataclass(frozen=True)
class SignedRankResult:
    w_plus: float
    p_value: float
    z: float
    n_used: int


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float]) -> SignedRankResult:
    """Two-sided paired signed-rank test; zero differences are dropped."""
    if len(x) != len(y):
        raise StatisticsInputError("paired samples must have equal length")
    diffs = [a - b for a, b in zip(x, y) if a != b]
    n = len(diffs)
    if n == 0:
        return SignedRankResult(0.0, 1.0, 0.0, 0)
    mags = [abs(d) for d in diffs]
    ranks = rankdata(mags)
    w_plus = math.fsum(r for r, d in zip(ranks, diffs) if d > 0)
    mu = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - _tie_term(mags) / 48.0
    if var <= 0.0:
        return SignedRankResult(w_plus, 1.0, 0.0, n)
    z = (w_plus - mu) / math.sqrt(var)
    return SignedRankResult(w_plus, min(1.0, 2.0 * _norm_sf(abs(z))), z, n)
