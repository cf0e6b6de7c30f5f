"""Deterministic counter-based random numbers for replicated simulation.

Each replication owns an independent stream derived from
``(master_seed, rep_index)``, so results never depend on scheduling or
thread count, and any single replication can be regenerated in isolation.
The k-th variate of a stream is a pure function of ``(stream_seed, k)``,
which lets the Monte Carlo engine draw for thousands of replications in
lockstep with numpy while a plain Python loop reproduces the exact same
values one at a time.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
# 2^64 / golden ratio, odd; the standard SplitMix64 increment.
_GAMMA = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0  # 2^-53


def mix64(z: int) -> int:
    """SplitMix64 finalizer: an avalanching bijection on 64-bit integers."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MULT1) & _MASK64
    z = ((z ^ (z >> 27)) * _MULT2) & _MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array (wraps modulo 2^64)."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
    return z ^ (z >> np.uint64(31))


def replication_seed(master_seed: int, rep_index: int) -> int:
    """Stream seed for one replication, collision-resistant in both arguments."""
    return mix64(master_seed ^ ((rep_index * _GAMMA) & _MASK64))


def stream_seeds(master_seed: int, n_reps: int, start: int = 0) -> np.ndarray:
    """Stream seeds for replications ``start .. start + n_reps - 1``."""
    idx = np.arange(start, start + n_reps, dtype=np.uint64)
    return mix64_array(np.uint64(master_seed & _MASK64) ^ (idx * np.uint64(_GAMMA)))


class CounterRng:
    """Scalar stream whose k-th draw is ``mix64(seed + k * gamma)``."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.seed + self.counter * _GAMMA) & _MASK64)

    def uniform(self) -> float:
        """Uniform on [0, 1) built from the top 53 bits of the next draw."""
        return (self.next_u64() >> 11) * _INV_2_53


def replication_rng(master_seed: int, rep_index: int) -> CounterRng:
    """The stream for one replication; identical inputs give identical streams."""
    return CounterRng(replication_seed(master_seed, rep_index))


def uniform_block(seeds: np.ndarray, counter: int) -> np.ndarray:
    """The counter-th uniform for every stream in ``seeds`` (lockstep draw).

    Bit-identical to ``CounterRng.uniform`` called ``counter`` times on each
    seed individually.
    """
    # Multiply in Python ints to avoid numpy scalar overflow warnings.
    offset = np.uint64((counter * _GAMMA) & _MASK64)
    z = mix64_array(seeds + offset)
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53
