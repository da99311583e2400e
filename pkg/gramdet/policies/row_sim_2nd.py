"""Second-most-similar corruption.

Z is the label whose observation distribution (column of P) has the
highest cosine similarity with the true label's, the true label excluded.
Ties go to the smallest label.
"""
import numpy as np

from gramdet.core.exceptions import ShapeError
from gramdet.core.policy import PolicyBase


def most_similar_labels(p):
    """For each label, the 1-based id of its most similar other label."""
    norms = np.linalg.norm(p, axis=0)
    cosine = (p.T @ p) / np.outer(norms, norms)
    np.fill_diagonal(cosine, -np.inf)
    return np.argmax(cosine, axis=1) + 1


class RowSim2ndPolicy(PolicyBase):

    needs_experiment = True

    def replacement(self, truth, d, generator, experiment=None):
        if experiment.d != d:
            raise ShapeError("Experiment has {} labels, truth {}".format(experiment.d, d))
        return most_similar_labels(experiment.p)[truth - 1]


NAME = 'row-sim-2nd'
PolicyCls = RowSim2ndPolicy
