"""Domain types and validated configuration for two-arm binary trials.

A trial is described by a :class:`TrialConfig`; its sufficient statistics
while running are a :class:`TrialCounts`; a finished replication is a
:class:`TrialResult`; aggregated operating characteristics over many
replications are a :class:`McSummary`. All types are immutable value
objects and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .rng import CounterRng

DEFAULT_SEED = 0xC0FFEE


class Rule(str, Enum):
    """Allocation rule targeted during the adaptive phase."""

    CR = "CR"
    NEYMAN_WALD = "NeymanWald"
    RSHIR_WALD = "RshirWald"
    NEYMAN_SCORE = "NeymanScore"
    RSHIR_SCORE = "RshirScore"


class Targeting(str, Enum):
    """Procedure converting a target proportion into an assignment probability."""

    SMLE = "SMLE"
    ERADE = "ERADE"


class TestKind(str, Enum):
    """Final-analysis test statistic."""

    WALD = "Wald"
    SCORE = "Score"
    AGRESTI_CAFFO_WALD = "AgrestiCaffoWald"


class Fallback(str, Enum):
    """Policy applied when an arm's estimated variance is zero."""

    NONE = "None"
    EQUAL_ON_ZERO_VARIANCE = "EqualOnZeroVariance"


class ConfigError(ValueError):
    """A trial configuration violates one of its invariants."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class TrialConfig:
    """Complete specification of one design scenario.

    ``p0`` and ``p1`` are the true success probabilities of the control and
    treatment arm. ``burn_in_per_arm`` patients per arm are allocated by
    permuted blocks before adaptation starts. ``erade_alpha`` is the ERADE
    tuning parameter; ``seed`` is the master seed from which every
    replication derives its own stream.
    """

    n: int
    p0: float
    p1: float
    burn_in_per_arm: int = 2
    alpha: float = 0.05
    erade_alpha: float = 0.5
    rule: Rule = Rule.CR
    targeting: Targeting = Targeting.ERADE
    test: TestKind = TestKind.WALD
    fallback: Fallback = Fallback.NONE
    seed: int = DEFAULT_SEED

    def with_truth(self, p0: float, p1: float) -> "TrialConfig":
        """Copy of this config with different true success probabilities."""
        return replace(self, p0=p0, p1=p1)


def validate(config: TrialConfig) -> TrialConfig:
    """Return ``config`` unchanged if every invariant holds.

    Raises :class:`ConfigError` naming the first violated field.
    """
    if not isinstance(config.n, int) or config.n < 1:
        raise ConfigError("n", "must be a positive integer")
    if not 0.0 < config.p0 < 1.0:
        raise ConfigError("p0", "out of (0,1)")
    if not 0.0 < config.p1 < 1.0:
        raise ConfigError("p1", "out of (0,1)")
    if not isinstance(config.burn_in_per_arm, int) or config.burn_in_per_arm < 1:
        raise ConfigError("burn_in_per_arm", "must be a positive integer")
    if 2 * config.burn_in_per_arm > config.n:
        raise ConfigError("burn_in_per_arm", "burn-in exceeds n")
    if not 0.0 < config.alpha < 1.0:
        raise ConfigError("alpha", "out of (0,1)")
    if not 0.0 < config.erade_alpha < 1.0:
        raise ConfigError("erade_alpha", "out of (0,1)")
    if not isinstance(config.seed, int) or not 0 <= config.seed < (1 << 64):
        raise ConfigError("seed", "must fit in an unsigned 64-bit integer")
    return config


@dataclass(frozen=True)
class TrialCounts:
    """Per-arm allocation and success counts; the trial's sufficient statistics."""

    n0: int
    n1: int
    s0: int
    s1: int

    def __post_init__(self):
        if min(self.n0, self.n1, self.s0, self.s1) < 0:
            raise ValueError("counts must be nonnegative")
        if self.s0 > self.n0 or self.s1 > self.n1:
            raise ValueError("successes cannot exceed patients in an arm")

    @property
    def total(self) -> int:
        return self.n0 + self.n1

    @property
    def successes(self) -> int:
        return self.s0 + self.s1


@dataclass(frozen=True)
class TrialResult:
    """Terminal outcome of one simulated trial."""

    reject: bool
    z_value: float
    prop_treatment: float
    total_successes: int
    counts: TrialCounts


@dataclass(frozen=True)
class McSummary:
    """Operating characteristics aggregated over replications.

    ``var_prop`` is the population variance of the treatment allocation
    proportion; ``mc_se_rejection`` is the binomial Monte Carlo standard
    error of the rejection rate.
    """

    reps: int
    rejection_rate: float
    mean_prop: float
    var_prop: float
    ens: float
    mc_se_rejection: float


def mc_standard_error(rate: float, reps: int) -> float:
    """Binomial Monte Carlo standard error sqrt(r (1 - r) / reps)."""
    return math.sqrt(rate * (1.0 - rate) / reps)


def draw_outcome(rng: CounterRng, p: float) -> int:
    """One Bernoulli(p) outcome: 1 with probability ``p``."""
    return 1 if rng.uniform() < p else 0
