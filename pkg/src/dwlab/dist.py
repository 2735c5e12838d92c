"""Probability primitives: normal CDF, chi-square(1) CDF/quantile, KS distance.

Everything is built on the C library error function (exact to about 1 ulp),
which keeps the module free of tabulated constants.  Only one degree of
freedom is needed for the chi-square, so no general gamma machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EmptySample

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via erf; absolute error well below 1e-12."""
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


def chi2_cdf1(x: float) -> float:
    """CDF of the chi-square law with one degree of freedom: erf(sqrt(x/2))."""
    if x < 0.0 or math.isnan(x):
        raise DomainError("chi-square CDF needs x >= 0")
    return math.erf(math.sqrt(0.5 * x))


def chi2_quantile1(p: float) -> float:
    """Inverse of chi2_cdf1 on (0, 1), solved by bisection to 1e-12.

    The CDF is strictly increasing, so plain bisection on x is exact enough;
    the bracket grows geometrically until it encloses p.
    """
    if not (0.0 < p < 1.0):
        raise DomainError("quantile needs 0 < p < 1")
    lo, hi = 0.0, 1.0
    while chi2_cdf1(hi) < p:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError("quantile bracket failed to close")
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if chi2_cdf1(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class KsResult:
    """Kolmogorov-Smirnov distance of a sample against a reference CDF."""

    statistic: float
    n: int


def ks_statistic(sample: Sequence[float], cdf: Callable[[float], float]) -> KsResult:
    """Sup distance between the empirical CDF of the sample and ``cdf``.

    The sample is sorted internally; the supremum is attained at a sample
    point from one side or the other, so both one-sided gaps are checked.
    """
    xs = np.sort(np.asarray(sample, dtype=np.float64))
    n = xs.size
    if n == 0:
        raise EmptySample("KS statistic of an empty sample")
    f = np.array([cdf(float(v)) for v in xs])
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    stat = float(np.max(np.maximum(np.abs(grid_hi - f), np.abs(grid_lo - f))))
    return KsResult(statistic=stat, n=n)
