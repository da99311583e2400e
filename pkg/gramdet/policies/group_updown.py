"""Group up/down corruption: one label up or down with equal odds, clamped to 1..d."""
import numpy as np

from gramdet.core.policy import PolicyBase


class GroupUpDownPolicy(PolicyBase):

    def replacement(self, truth, d, generator, experiment=None):
        up = generator.random(truth.size) < 0.5
        return np.where(up, np.minimum(truth + 1, d), np.maximum(truth - 1, 1))


NAME = 'group-updown'
PolicyCls = GroupUpDownPolicy
