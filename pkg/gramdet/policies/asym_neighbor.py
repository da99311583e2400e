"""Asymmetric neighbor corruption.

Z is the next label up (clamped at d) with probability 0.85, otherwise
uniform over the labels other than the true one.
"""
import numpy as np

from gramdet.core.policy import PolicyBase

NEIGHBOR_PROBABILITY = 0.85


class AsymNeighborPolicy(PolicyBase):

    def replacement(self, truth, d, generator, experiment=None):
        up = np.minimum(truth + 1, d)
        if d == 1:
            return up
        other = generator.integers(1, d, size=truth.size)
        other = other + (other >= truth)
        return np.where(generator.random(truth.size) < NEIGHBOR_PROBABILITY, up, other)


NAME = 'asym-neighbor'
PolicyCls = AsymNeighborPolicy
