"""Target allocation proportions for two-arm binary response-adaptive designs.

Five rules are supported. Complete randomization targets 1/2. For the
per-arm-variance (Wald-style) test there are closed forms: the
power-maximizing split sqrt(p1 q1) / (sqrt(p0 q0) + sqrt(p1 q1)) and the
failure-minimizing split sqrt(p1) / (sqrt(p0) + sqrt(p1)). For the
pooled-variance (score-style) test, the variance-minimizing split is the
exact complement of the power-maximizing one, while the failure-minimizing
split has no closed form and is located numerically: a coarse bracketing
scan followed by golden-section refinement of

    g(rho) = [(1 - rho) q0 + rho q1] * V(rho)

where V is the pooled variance of the standardized difference with the
sample sizes written as n0 = (1 - rho) n, n1 = rho n. A brute-force grid
minimizer is provided as an independent oracle for tests.

Throughout, ``rho`` is the share of patients allocated to the treatment
arm (arm 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Fallback, Rule

# Numeric search runs on [SEARCH_EPS, 1 - SEARCH_EPS]: the objective
# diverges at 0 and 1 for interior estimates, so the minimizer is interior,
# and the margin guards the divisions at the endpoints.
SEARCH_EPS = 1e-6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# Scan grid for bracketing: linear over the interior plus geometric points
# near the endpoints, where boundary basins appear for degenerate estimates.
# Symmetric under rho -> 1 - rho so label-swapped problems bracket mirrored
# minima.
_EDGE = np.array([1e-6, 1e-5, 1e-4, 1e-3, 5e-3])
_SCAN = np.concatenate([_EDGE, np.linspace(0.01, 0.99, 99), 1.0 - _EDGE[::-1]])


@dataclass(frozen=True)
class PointEstimates:
    """Per-arm success-probability estimates feeding a target formula."""

    p0_hat: float
    p1_hat: float

    @property
    def q0_hat(self) -> float:
        return 1.0 - self.p0_hat

    @property
    def q1_hat(self) -> float:
        return 1.0 - self.p1_hat


@dataclass(frozen=True)
class TargetProportion:
    """A target treatment share in [0, 1].

    ``degenerate`` is set when a convention replaced an undefined or flat
    formula value (both formulas 0/0, or a flat objective); the convention
    value is 1/2.
    """

    rho: float
    degenerate: bool = False


def rho_neyman_wald(est: PointEstimates) -> TargetProportion:
    """Power-maximizing split for the per-arm-variance test."""
    v0 = math.sqrt(est.p0_hat * est.q0_hat)
    v1 = math.sqrt(est.p1_hat * est.q1_hat)
    den = v0 + v1
    if den == 0.0:
        return TargetProportion(0.5, degenerate=True)
    return TargetProportion(v1 / den)


def rho_neyman_score(est: PointEstimates) -> TargetProportion:
    """Variance-minimizing split for the pooled-variance test.

    Equals one minus :func:`rho_neyman_wald` at the same estimates.
    """
    v0 = math.sqrt(est.p0_hat * est.q0_hat)
    v1 = math.sqrt(est.p1_hat * est.q1_hat)
    den = v0 + v1
    if den == 0.0:
        return TargetProportion(0.5, degenerate=True)
    return TargetProportion(v0 / den)


def rho_rshir_wald(est: PointEstimates) -> TargetProportion:
    """Failure-minimizing split under a per-arm-variance constraint."""
    r0 = math.sqrt(est.p0_hat)
    r1 = math.sqrt(est.p1_hat)
    den = r0 + r1
    if den == 0.0:
        return TargetProportion(0.5, degenerate=True)
    return TargetProportion(r1 / den)


def score_variance(est: PointEstimates, rho):
    """n-scaled pooled variance of the standardized difference at split ``rho``.

    Expanded form; accepts a float or ndarray for ``rho``. Equals
    n * phat * qhat / (n0 * n1) with n0 = (1 - rho) n, n1 = rho n and
    phat = (1 - rho) p0 + rho p1 (see :func:`pooled_score_variance`).
    """
    p0, p1 = est.p0_hat, est.p1_hat
    return (
        p0 / rho
        + p1 / (1.0 - rho)
        - (1.0 - rho) * p0 * p0 / rho
        - 2.0 * p0 * p1
        - rho * p1 * p1 / (1.0 - rho)
    )


def pooled_score_variance(est: PointEstimates, rho):
    """Same quantity as :func:`score_variance`, written via the pooled rate."""
    phat = (1.0 - rho) * est.p0_hat + rho * est.p1_hat
    return phat * (1.0 - phat) / (rho * (1.0 - rho))


def rshir_score_objective(est: PointEstimates, rho):
    """Expected-failure share times the pooled test variance at split ``rho``."""
    failures = (1.0 - rho) * est.q0_hat + rho * est.q1_hat
    return failures * score_variance(est, rho)


def _objective_reduced(p0_hat, p1_hat, rho):
    # Algebraically identical to rshir_score_objective: the failure share is
    # qhat itself, so g = phat * qhat^2 / (rho (1 - rho)). Fewer operations
    # for the inner solver loop.
    phat = (1.0 - rho) * p0_hat + rho * p1_hat
    qhat = 1.0 - phat
    return phat * qhat * qhat / (rho * (1.0 - rho))


def rshir_score_argmin(p0_hat, p1_hat, tol: float = 1e-8):
    """Minimizer of the failure-times-variance objective on the search interval.

    Array-capable core used by both the scalar API and the vectorized
    engine: scalar inputs give a scalar, arrays give an elementwise result.
    A full scan of the bracketing grid locates the global basin; fixed-count
    golden-section iterations then shrink the bracket far below ``tol``.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    p0 = np.atleast_1d(np.asarray(p0_hat, dtype=np.float64))
    p1 = np.atleast_1d(np.asarray(p1_hat, dtype=np.float64))
    best_val = np.full(p0.shape, np.inf)
    best_idx = np.zeros(p0.shape, dtype=np.int64)
    for k, rho in enumerate(_SCAN):
        val = _objective_reduced(p0, p1, rho)
        better = val < best_val
        best_idx[better] = k
        best_val = np.where(better, val, best_val)
    lo = _SCAN[np.maximum(best_idx - 1, 0)]
    hi = _SCAN[np.minimum(best_idx + 1, len(_SCAN) - 1)]
    # Iteration count from the widest possible bracket (0.02) down to a
    # width floor of min(tol, 1e-9); the count is data-independent so the
    # scalar and vector paths shrink identically.
    floor = min(tol, 1e-9)
    iters = int(math.ceil(math.log(floor / 0.02) / math.log(_INVPHI)))
    for _ in range(iters):
        width = hi - lo
        c = hi - _INVPHI * width
        d = lo + _INVPHI * width
        fc = _objective_reduced(p0, p1, c)
        fd = _objective_reduced(p0, p1, d)
        left = fc < fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
    out = 0.5 * (lo + hi)
    if np.isscalar(p0_hat) or getattr(p0_hat, "ndim", 1) == 0:
        return float(out[0])
    return out


def _is_flat(p0_hat: float, p1_hat: float) -> bool:
    # Equal estimates with zero variance make the objective identically 0.
    return p0_hat == p1_hat and (p0_hat == 0.0 or p0_hat == 1.0)


def rho_rshir_score(est: PointEstimates, tol: float = 1e-8) -> TargetProportion:
    """Failure-minimizing split under a pooled-variance constraint.

    Located numerically; the objective value at the returned point is within
    ``tol`` of the brute-force grid minimum (see
    :func:`oracle_rho_rshir_score`).
    """
    if _is_flat(est.p0_hat, est.p1_hat):
        return TargetProportion(0.5, degenerate=True)
    return TargetProportion(rshir_score_argmin(est.p0_hat, est.p1_hat, tol=tol))


def oracle_rho_rshir_score(est: PointEstimates, step: float = 1e-4) -> float:
    """Exhaustive grid argmin of the official objective; test oracle only."""
    if not 0.0 < step <= 0.01:
        raise ValueError("step must be in (0, 0.01]")
    cells = round(1.0 / step)
    grid = np.arange(1, cells, dtype=np.float64) * step
    vals = rshir_score_objective(est, grid)
    return float(grid[np.argmin(vals)])


_CLOSED_FORMS = {
    Rule.NEYMAN_WALD: rho_neyman_wald,
    Rule.NEYMAN_SCORE: rho_neyman_score,
    Rule.RSHIR_WALD: rho_rshir_wald,
    Rule.RSHIR_SCORE: rho_rshir_score,
}


def target_for(rule: Rule, est: PointEstimates, fallback: Fallback) -> TargetProportion:
    """Target proportion for ``rule`` at ``est`` under the given fallback policy.

    Under :attr:`Fallback.EQUAL_ON_ZERO_VARIANCE`, any zero per-arm variance
    estimate short-circuits to an equal split. Under :attr:`Fallback.NONE`
    the raw formula value is used, clamped to [0, 1]; undefined 0/0 cases
    still fall back to 1/2 with the degenerate flag set.
    """
    if rule is Rule.CR:
        return TargetProportion(0.5)
    if fallback is Fallback.EQUAL_ON_ZERO_VARIANCE:
        if est.p0_hat * est.q0_hat == 0.0 or est.p1_hat * est.q1_hat == 0.0:
            return TargetProportion(0.5, degenerate=True)
    target = _CLOSED_FORMS[rule](est)
    if target.degenerate:
        return target
    return TargetProportion(min(1.0, max(0.0, target.rho)))


def target_rho_block(rule: Rule, p0_hat: np.ndarray, p1_hat: np.ndarray,
                     fallback: Fallback) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`target_for` over replication arrays.

    Returns ``(rho, raw_extreme)`` where ``raw_extreme`` marks replications
    whose raw formula value sits exactly at 0 or 1 (the positivity clamp in
    the engine applies only to those, and only without a fallback).
    Elementwise bit-identical to the scalar path.
    """
    if rule is Rule.CR:
        rho = np.full(p0_hat.shape, 0.5)
        return rho, np.zeros(p0_hat.shape, dtype=bool)
    q0 = 1.0 - p0_hat
    q1 = 1.0 - p1_hat
    v0sq = p0_hat * q0
    v1sq = p1_hat * q1
    if rule in (Rule.NEYMAN_WALD, Rule.NEYMAN_SCORE):
        v0 = np.sqrt(v0sq)
        v1 = np.sqrt(v1sq)
        den = v0 + v1
        num = v1 if rule is Rule.NEYMAN_WALD else v0
        rho = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.5)
    elif rule is Rule.RSHIR_WALD:
        r0 = np.sqrt(p0_hat)
        r1 = np.sqrt(p1_hat)
        den = r0 + r1
        rho = np.where(den > 0.0, r1 / np.where(den > 0.0, den, 1.0), 0.5)
    else:
        rho = np.asarray(rshir_score_argmin(p0_hat, p1_hat))
        flat = (p0_hat == p1_hat) & ((p0_hat == 0.0) | (p0_hat == 1.0))
        rho = np.where(flat, 0.5, rho)
    if fallback is Fallback.EQUAL_ON_ZERO_VARIANCE:
        zero_var = (v0sq == 0.0) | (v1sq == 0.0)
        rho = np.where(zero_var, 0.5, rho)
        return rho, np.zeros(p0_hat.shape, dtype=bool)
    raw_extreme = (rho == 0.0) | (rho == 1.0)
    return rho, raw_extreme
