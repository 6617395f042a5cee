"""Paired-comparison statistics with no stats dependency.

The only distribution needed is Student's t, and only its two-sided tail,
which reduces to one regularized incomplete beta evaluation:

    p = I_x(nu/2, 1/2),   x = nu / (nu + t^2).

The incomplete beta is computed by the modified Lentz continued fraction,
accurate to ~1e-14 over the arguments that show up here (a = nu/2 with
nu up to a few hundred, b = 1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_MAX_ITER = 300
_TINY = 1e-300
_EPS = 1e-15


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard error (sample stddev / sqrt(n))."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least two values for a standard error")
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_continued_fraction(x: float, a: float, b: float) -> float:
    """Lentz evaluation of the continued fraction for I_x(a, b)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise RuntimeError(f"incomplete beta did not converge for x={x} a={a} b={b}")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for 0 <= x <= 1, a > 0, b > 0."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x={x} outside [0, 1]")
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    )
    # The continued fraction converges fast only below the mean; use the
    # symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(x, a, b) / a
    return 1.0 - front * _beta_continued_fraction(1.0 - x, b, a) / b


def student_t_two_sided(t_stat: float, dof: int) -> float:
    """P(|T| >= |t|) for T ~ Student's t with dof degrees of freedom."""
    if dof < 1:
        raise ValueError("degrees of freedom must be at least 1")
    if math.isinf(t_stat):
        return 0.0
    if t_stat == 0.0:
        return 1.0
    x = dof / (dof + t_stat * t_stat)
    return regularized_incomplete_beta(x, 0.5 * dof, 0.5)


@dataclass(frozen=True)
class TTestResult:
    """Two-sided paired t-test outcome.

    zero_variance marks the degenerate case of a constant difference
    sequence, where the statistic is 0 (identical samples, p = 1) or
    infinite (constant nonzero shift, p = 0) rather than estimated.
    """

    mean_difference: float
    t_statistic: float
    dof: int
    p_value: float
    zero_variance: bool


def paired_t(first: Sequence[float], second: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test of mean(first - second) = 0."""
    a = np.asarray(first, dtype=float)
    b = np.asarray(second, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d and equally long")
    n = a.size
    if n < 2:
        raise ValueError("need at least two pairs")
    diff = a - b
    mean = float(diff.mean())
    sd = float(diff.std(ddof=1))
    dof = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, 0.0, dof, 1.0, True)
        t_stat = math.copysign(math.inf, mean)
        return TTestResult(mean, t_stat, dof, 0.0, True)
    t_stat = mean / (sd / math.sqrt(n))
    return TTestResult(mean, t_stat, dof, student_t_two_sided(t_stat, dof), False)
