"""Wilcoxon-Mann-Whitney rank-sum test and descriptive summaries.

Two p-value paths: exact enumeration of the permutation distribution for
small pooled sizes, and the normal approximation with midranks, tie-corrected
variance and continuity correction for everything else. The exact path doubles
as the oracle for the approximation in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

# Exact enumeration caps at C(16, 8) = 12870 arrangements.
EXACT_LIMIT = 16


@dataclass(frozen=True)
class TestResult:
    u_statistic: float
    p_value: float
    method: str  # "exact" or "normal_approx"
    z_score: float | None = None


@dataclass(frozen=True)
class Summary:
    n: int
    mean: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def midranks(pooled: np.ndarray) -> np.ndarray:
    """Ranks 1..N with ties sharing their average rank."""
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(len(pooled), dtype=np.float64)
    sorted_vals = pooled[order]
    i = 0
    n = len(pooled)
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        # positions i..j (0-based) share the average of ranks i+1..j+1
        ranks[order[i:j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    return ranks


def mann_whitney_u(a, b, method: str = "auto") -> TestResult:
    """Two-sided Mann-Whitney U test of samples a and b.

    method: "auto" picks exact enumeration when len(a)+len(b) <= EXACT_LIMIT,
    the normal approximation otherwise; "exact" and "approx" force a path.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValueError("both samples must be non-empty")
    if method not in ("auto", "exact", "approx"):
        raise ValueError(f"unknown method {method!r}")

    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    r_a = float(ranks[:n].sum())
    u_a = r_a - n * (n + 1) / 2.0

    if method == "exact" or (method == "auto" and n + m <= EXACT_LIMIT):
        p = _exact_p(ranks, n, u_a)
        return TestResult(u_statistic=u_a, p_value=p, method="exact")

    z, p = _approx_p(pooled, ranks, n, m, u_a)
    return TestResult(u_statistic=u_a, p_value=p, method="normal_approx", z_score=z)


def _exact_p(ranks: np.ndarray, n: int, u_obs: float) -> float:
    """Fraction of equally likely group assignments whose U deviates from
    n*m/2 at least as far as the observed one."""
    total = len(ranks)
    m = total - n
    center = n * m / 2.0
    observed_dev = abs(u_obs - center)
    offset = n * (n + 1) / 2.0
    hits = 0
    count = 0
    for subset in combinations(range(total), n):
        u = ranks[list(subset)].sum() - offset
        # ranks are exact multiples of 0.5, so float sums carry no noise here
        if abs(u - center) >= observed_dev - 1e-12:
            hits += 1
        count += 1
    return hits / count


def _approx_p(pooled: np.ndarray, ranks: np.ndarray, n: int, m: int,
              u_a: float) -> tuple[float, float]:
    total = n + m
    mu = n * m / 2.0
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(((tie_counts ** 3) - tie_counts).sum())
    var = n * m / 12.0 * ((total + 1) - tie_term / (total * (total - 1)))
    if var <= 0.0:
        # every pooled value tied: no evidence either way
        return 0.0, 1.0
    z = max(0.0, abs(u_a - mu) - 0.5) / math.sqrt(var)
    p = min(1.0, math.erfc(z / math.sqrt(2.0)))
    return z, p


def describe(sample) -> Summary:
    values = np.asarray(sample, dtype=np.float64)
    if len(values) == 0:
        raise ValueError("sample must be non-empty")
    q1, med, q3 = np.percentile(values, [25.0, 50.0, 75.0], method="linear")
    return Summary(
        n=len(values),
        mean=float(values.mean()),
        minimum=float(values.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(values.max()),
    )
