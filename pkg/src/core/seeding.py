"""
isac-fbl - Seed Splitting

Counter-based stream derivation: every random draw in the library is keyed by
(seed, *counters) so parallel workers never share a stream and results do not
depend on how work is scheduled.

Usage:
    >>> rng = spawn_generator(42, 3, 17)   # tuple 3, trial 17
    >>> rng.standard_normal()
"""

import numpy as np

# Counter namespaces keep codebook, channel and noise streams disjoint even when
# they share the user-facing seed.
CODEBOOK_STREAM = 0
TRIAL_STREAM = 1
CAPACITY_STREAM = 2

_U64_MAX = 2**64 - 1


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def seed_sequence(seed: int, *counters: int) -> np.random.SeedSequence:
    """SeedSequence for the stream identified by (seed, *counters)."""
    return np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(c) for c in counters))


def spawn_generator(seed: int, *counters: int) -> np.random.Generator:
    """
    Independent Generator for the stream (seed, *counters).

    Args:
        seed: User-facing 64-bit unsigned seed
        counters: Non-negative integers naming the sub-stream

    Returns:
        PCG64-backed numpy Generator
    """
    return np.random.default_rng(seed_sequence(seed, *counters))


def derive_seed(seed: int, *counters: int) -> int:
    """64-bit integer seed for the stream (seed, *counters)."""
    state = seed_sequence(seed, *counters).generate_state(1, dtype=np.uint64)
    return int(state[0])
