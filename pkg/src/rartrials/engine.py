"""Trial simulation and Monte Carlo aggregation.

Two implementations of the same trial process are kept deliberately:
:func:`run_trial` is the readable per-patient reference, and the private
vectorized path advances every replication in lockstep for speed.
Both consume the identical draw schedule from the counter-based streams,

    block order draws, burn-in outcomes, then per adaptive patient one
    assignment draw followed by one outcome draw,

so regenerating any single replication with :func:`replicate` reproduces
the vectorized result bit for bit. Replication i always uses the stream
derived from (config.seed, i), which makes summaries independent of thread
count and execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import (Fallback, McSummary, Rule, Targeting, TestKind, TrialConfig,
                   TrialCounts, TrialResult, draw_outcome, mc_standard_error,
                   validate)
from .inference import agresti_caffo_z, critical_value, score_z0, wald_z1
from .proportions import PointEstimates, target_for, target_rho_block
from .rng import CounterRng, replication_rng, stream_seeds, uniform_block
from .targeting import TIE_TOL, erade_probability

# Raw targets of exactly 0 or 1 (possible only without a fallback policy)
# would silence an arm forever; every assignment probability is kept
# strictly inside (0, 1) by this margin. It is small enough that the
# operating characteristics of the degenerate regimes are not disturbed.
POSITIVITY_EPS = 1e-9

_TESTS = {
    TestKind.WALD: wald_z1,
    TestKind.SCORE: score_z0,
    TestKind.AGRESTI_CAFFO_WALD: agresti_caffo_z,
}


@dataclass(frozen=True)
class BurnInPlan:
    """Arm labels for the burn-in patients, balanced in blocks of two."""

    sequence: tuple[int, ...]


def burn_in_plan(burn_in_per_arm: int, rng: CounterRng) -> BurnInPlan:
    """Permuted blocks of size two: each block holds one patient per arm."""
    seq: list[int] = []
    for _ in range(burn_in_per_arm):
        if rng.uniform() < 0.5:
            seq.extend((0, 1))
        else:
            seq.extend((1, 0))
    return BurnInPlan(tuple(seq))


def _assignment_probability(config: TrialConfig, n0: int, n1: int,
                            s0: int, s1: int, j: int) -> float:
    """Probability that patient j+1 (0-based j patients so far) gets arm 1."""
    if config.rule is Rule.CR:
        return 0.5
    est = PointEstimates(s0 / n0, s1 / n1)
    target = target_for(config.rule, est, config.fallback)
    if config.targeting is Targeting.SMLE:
        p = target.rho
    else:
        p = erade_probability(target, n1, j, config.erade_alpha).p_treat
    if config.fallback is Fallback.NONE and (target.rho == 0.0 or target.rho == 1.0):
        p = min(max(p, POSITIVITY_EPS), 1.0 - POSITIVITY_EPS)
    return p


def run_trial(config: TrialConfig, rng: CounterRng) -> TrialResult:
    """Simulate one complete trial: burn-in, adaptive phase, final test."""
    validate(config)
    plan = burn_in_plan(config.burn_in_per_arm, rng)
    n0 = n1 = s0 = s1 = 0
    for arm in plan.sequence:
        y = draw_outcome(rng, config.p1 if arm == 1 else config.p0)
        if arm == 1:
            n1 += 1
            s1 += y
        else:
            n0 += 1
            s0 += y
    for j in range(2 * config.burn_in_per_arm, config.n):
        p_treat = _assignment_probability(config, n0, n1, s0, s1, j)
        arm = 1 if rng.uniform() < p_treat else 0
        y = draw_outcome(rng, config.p1 if arm == 1 else config.p0)
        if arm == 1:
            n1 += 1
            s1 += y
        else:
            n0 += 1
            s0 += y
    counts = TrialCounts(n0=n0, n1=n1, s0=s0, s1=s1)
    outcome = _TESTS[config.test](counts, config.alpha)
    return TrialResult(
        reject=outcome.reject,
        z_value=outcome.z,
        prop_treatment=counts.n1 / counts.total,
        total_successes=counts.successes,
        counts=counts,
    )


def replicate(config: TrialConfig, rep_index: int) -> TrialResult:
    """Regenerate replication ``rep_index`` of a Monte Carlo run in isolation."""
    return run_trial(config, replication_rng(config.seed, rep_index))


def _test_block(test: TestKind, n0, s0, n1, s1, crit: float):
    """Vectorized final test; returns (z, reject) arrays."""
    if test is TestKind.AGRESTI_CAFFO_WALD:
        m0 = n0 + 2
        m1 = n1 + 2
        p0 = (s0 + 1) / m0
        p1 = (s1 + 1) / m1
        var = p0 * (1.0 - p0) / m0 + p1 * (1.0 - p1) / m1
        z = (p1 - p0) / np.sqrt(var)
        return z, np.abs(z) > crit
    p0 = s0 / n0
    p1 = s1 / n1
    if test is TestKind.WALD:
        var = p0 * (1.0 - p0) / n0 + p1 * (1.0 - p1) / n1
    else:
        phat = (s0 + s1) / (n0 + n1)
        var = phat * (1.0 - phat) * (1.0 / n0 + 1.0 / n1)
    ok = var > 0.0
    z = (p1 - p0) / np.sqrt(np.where(ok, var, 1.0))
    z = np.where(ok, z, 0.0)
    return z, ok & (np.abs(z) > crit)


def _simulate_seeds(config: TrialConfig, seeds: np.ndarray):
    """Advance all streams in ``seeds`` through one full trial in lockstep.

    Returns integer/float arrays (reject, z, n1, s0, s1) indexed like
    ``seeds``. Every replication consumes draws on the same schedule as
    :func:`run_trial`.
    """
    m = seeds.size
    bpa = config.burn_in_per_arm
    counter = 0
    order_flags = []
    for _ in range(bpa):
        counter += 1
        order_flags.append(uniform_block(seeds, counter) < 0.5)  # arm 0 first
    s0 = np.zeros(m, dtype=np.int64)
    s1 = np.zeros(m, dtype=np.int64)
    for b in range(bpa):
        for slot in (0, 1):
            counter += 1
            u = uniform_block(seeds, counter)
            arm_is_0 = order_flags[b] if slot == 0 else ~order_flags[b]
            y = u < np.where(arm_is_0, config.p0, config.p1)
            s0 += (arm_is_0 & y).astype(np.int64)
            s1 += (~arm_is_0 & y).astype(np.int64)
    n0 = np.full(m, bpa, dtype=np.int64)
    n1 = np.full(m, bpa, dtype=np.int64)
    erade = config.targeting is Targeting.ERADE
    for j in range(2 * bpa, config.n):
        if config.rule is Rule.CR:
            p_treat = np.full(m, 0.5)
        else:
            p0_hat = s0 / n0
            p1_hat = s1 / n1
            rho, raw_extreme = target_rho_block(config.rule, p0_hat, p1_hat,
                                                config.fallback)
            if erade:
                excess = n1 - rho * j
                p_treat = np.where(
                    excess > TIE_TOL,
                    config.erade_alpha * rho,
                    np.where(excess < -TIE_TOL,
                             1.0 - config.erade_alpha * (1.0 - rho),
                             rho),
                )
            else:
                p_treat = rho
            if config.fallback is Fallback.NONE:
                clamped = np.clip(p_treat, POSITIVITY_EPS, 1.0 - POSITIVITY_EPS)
                p_treat = np.where(raw_extreme, clamped, p_treat)
        counter += 1
        arm1 = uniform_block(seeds, counter) < p_treat
        counter += 1
        u = uniform_block(seeds, counter)
        y = u < np.where(arm1, config.p1, config.p0)
        a1 = arm1.astype(np.int64)
        n1 += a1
        n0 += 1 - a1
        s1 += (arm1 & y).astype(np.int64)
        s0 += (~arm1 & y).astype(np.int64)
    crit = critical_value(config.alpha)
    z, reject = _test_block(config.test, n0, s0, n1, s1, crit)
    return reject, z, n1, s0, s1


def _chunk_ranges(reps: int, threads: int) -> list[tuple[int, int]]:
    per = max(1, math.ceil(reps / max(1, threads)))
    return [(lo, min(lo + per, reps)) for lo in range(0, reps, per)]


def run_monte_carlo(config: TrialConfig, reps: int, threads: int = 1,
                    per_rep_path=None) -> McSummary:
    """Aggregate ``reps`` independent replications into operating characteristics.

    Replication i uses the stream derived from (config.seed, i); the result
    is bit-identical for any ``threads``. ``per_rep_path`` optionally
    streams one CSV row per replication for audit.
    """
    validate(config)
    if reps < 1:
        raise ValueError("reps must be at least 1")
    ranges = _chunk_ranges(reps, threads)
    seed_blocks = [stream_seeds(config.seed, hi - lo, start=lo) for lo, hi in ranges]
    if threads > 1 and len(seed_blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(lambda s: _simulate_seeds(config, s), seed_blocks))
    else:
        blocks = [_simulate_seeds(config, s) for s in seed_blocks]
    reject = np.concatenate([b[0] for b in blocks])
    z = np.concatenate([b[1] for b in blocks])
    n1 = np.concatenate([b[2] for b in blocks])
    s0 = np.concatenate([b[3] for b in blocks])
    s1 = np.concatenate([b[4] for b in blocks])
    if per_rep_path is not None:
        _write_per_rep(per_rep_path, reject, z, n1, s0, s1)
    prop = n1 / config.n
    rate = float(reject.mean())
    return McSummary(
        reps=reps,
        rejection_rate=rate,
        mean_prop=float(prop.mean()),
        var_prop=float(prop.var()),
        ens=float((s0 + s1).mean()),
        mc_se_rejection=mc_standard_error(rate, reps),
    )


def _write_per_rep(path, reject, z, n1, s0, s1):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rep,reject,z,n1,s0,s1\n")
        for i in range(reject.size):
            fh.write(f"{i},{int(reject[i])},{float(z[i])!r},{n1[i]},{s0[i]},{s1[i]}\n")


def ens(results: Sequence[TrialResult] | Iterable[TrialResult]) -> float:
    """Mean number of successes across trial results."""
    totals = [r.total_successes for r in results]
    if not totals:
        raise ValueError("no results")
    return sum(totals) / len(totals)
