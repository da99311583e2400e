"""Uniform corruption: Z is uniform over all labels, the true one included."""
from gramdet.core.policy import PolicyBase


class UniformPolicy(PolicyBase):

    def replacement(self, truth, d, generator, experiment=None):
        return generator.integers(1, d + 1, size=truth.size)


NAME = 'uniform'
PolicyCls = UniformPolicy
