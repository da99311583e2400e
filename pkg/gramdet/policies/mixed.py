"""Mixed corruption.

Each row of the policy matrix pi is drawn from a Dirichlet whose weights mix
a diagonal bump, ring locality, an upward drift and a pull toward one
default label. pi is drawn once per corrupt call.
"""
import numpy as np

from gramdet.core.policy import MixedParams, PolicyBase


def dirichlet_weights(d, params=MixedParams()):
    """The d x d Dirichlet concentration matrix, row i for true label i."""
    i = np.arange(1, d + 1)[:, None]
    j = np.arange(1, d + 1)[None, :]
    ring = np.minimum(np.abs(i - j), d - np.abs(i - j))
    return (params.alpha_off +
            params.alpha_diag * (i == j) +
            params.lambda_loc * np.exp(-ring) +
            params.lambda_up * np.exp(params.gamma * (j - i)) +
            params.lambda_def * (j == params.default_label))


def mixed_policy_matrix(d, params, generator):
    """Row-stochastic pi with one Dirichlet draw per row."""
    weights = dirichlet_weights(d, params)
    return np.vstack([generator.dirichlet(row) for row in weights])


class MixedPolicy(PolicyBase):

    def replacement(self, truth, d, generator, experiment=None):
        pi = mixed_policy_matrix(d, self.spec.mixed, generator)
        cdf = np.cumsum(pi, axis=1)[truth - 1]
        u = generator.random(truth.size)
        return np.minimum((cdf < u[:, None]).sum(axis=1) + 1, d)


NAME = 'mixed'
PolicyCls = MixedPolicy
