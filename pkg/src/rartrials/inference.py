"""Final-analysis test statistics and the two-sided rejection decision.

Three tests of the null p0 = p1 are provided: the per-arm-variance
(Wald-style) statistic, the pooled-variance (score) statistic whose square
is the Pearson chi-squared statistic of the 2x2 table, and an adjusted
per-arm-variance statistic that adds one artificial success and one
artificial failure to each arm. A degenerate statistic (zero variance
estimate) is defined as z = 0 with no rejection: conservative under the
null and total as a decision function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import TrialCounts

# Acklam's rational approximation for the standard normal quantile
# (relative error below 1.15e-9), sharpened by one Halley step against the
# erfc-based CDF, which brings it to machine precision.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TestOutcome:
    """Final statistic, decision, and whether a degenerate convention applied."""

    z: float
    reject: bool
    degenerate: bool = False


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0,1)")
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # One Halley refinement: e = Phi(x) - p, u = e / phi(x).
    e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = e * _SQRT_2PI * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def critical_value(alpha: float) -> float:
    """Two-sided critical value, the (1 - alpha/2) normal quantile."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0,1)")
    return normal_quantile(1.0 - alpha / 2.0)


def decide(z: float, alpha: float) -> bool:
    """Two-sided decision: reject when |z| exceeds the critical value."""
    return abs(z) > critical_value(alpha)


def _require_both_arms(counts: TrialCounts):
    if counts.n0 < 1 or counts.n1 < 1:
        raise ValueError("both arms need at least one patient")


def wald_z1(counts: TrialCounts, alpha: float = 0.05) -> TestOutcome:
    """Standardized difference with per-arm variance estimates."""
    _require_both_arms(counts)
    p0 = counts.s0 / counts.n0
    p1 = counts.s1 / counts.n1
    var = p0 * (1.0 - p0) / counts.n0 + p1 * (1.0 - p1) / counts.n1
    if var == 0.0:
        return TestOutcome(0.0, False, degenerate=True)
    z = (p1 - p0) / math.sqrt(var)
    return TestOutcome(z, decide(z, alpha))


def score_z0(counts: TrialCounts, alpha: float = 0.05) -> TestOutcome:
    """Standardized difference with the pooled variance estimate.

    The squared statistic equals the Pearson chi-squared statistic of the
    corresponding 2x2 table.
    """
    _require_both_arms(counts)
    p0 = counts.s0 / counts.n0
    p1 = counts.s1 / counts.n1
    phat = (counts.s0 + counts.s1) / (counts.n0 + counts.n1)
    var = phat * (1.0 - phat) * (1.0 / counts.n0 + 1.0 / counts.n1)
    if var == 0.0:
        return TestOutcome(0.0, False, degenerate=True)
    z = (p1 - p0) / math.sqrt(var)
    return TestOutcome(z, decide(z, alpha))


def agresti_caffo_z(counts: TrialCounts, alpha: float = 0.05) -> TestOutcome:
    """Per-arm-variance statistic after adding one success and one failure per arm.

    The adjusted estimates (s + 1) / (n + 2) enter both the difference and
    the variance, with the enlarged sample sizes in the denominators, so the
    statistic is never degenerate.
    """
    _require_both_arms(counts)
    m0 = counts.n0 + 2
    m1 = counts.n1 + 2
    p0 = (counts.s0 + 1) / m0
    p1 = (counts.s1 + 1) / m1
    var = p0 * (1.0 - p0) / m0 + p1 * (1.0 - p1) / m1
    z = (p1 - p0) / math.sqrt(var)
    return TestOutcome(z, decide(z, alpha))
