"""Merge corruption: labels 1 and 2 both become 1, others are kept."""
import numpy as np

from gramdet.core.policy import PolicyBase


class Merge01Policy(PolicyBase):

    min_labels = 2

    def replacement(self, truth, d, generator, experiment=None):
        return np.where(truth <= 2, 1, truth)


NAME = 'merge-01'
PolicyCls = Merge01Policy
