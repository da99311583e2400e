"""Splittable 64-bit seed derivation.

Every stochastic operation takes an explicit seed. Child seeds are derived
from a master seed by xor-ing in an index and passing the result through a
SplitMix64 finalizer, one step per index, so a stream is fixed by its path.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# stream tags used by the trial engine
STREAM_TRUTH = 1
STREAM_EXPERIMENT = 2
STREAM_OBSERVATIONS = 3
STREAM_TRIAL = 4
STREAM_ESTIMATOR = 5
STREAM_DATASET = 6


def mix64(value):
    """SplitMix64 finalizer."""
    z = (value + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master, *path):
    """Seed for the stream reached from master by the given indices."""
    seed = int(master) & MASK64
    for index in path:
        seed = mix64(seed ^ (int(index) & MASK64))
    return seed


def rng(seed):
    """A numpy Generator for a 64-bit seed."""
    return np.random.default_rng(int(seed) & MASK64)
