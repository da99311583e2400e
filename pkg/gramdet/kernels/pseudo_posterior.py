"""Pseudo-posterior kernel.

Observations are posterior probability vectors over the labels and the
kernel is their dot product.
"""
import numpy as np

from gramdet.core.exceptions import KernelDomainError
from gramdet.core.kernels import SIMPLEX_TOLERANCE
from gramdet.kernels.linear import LinearKernel


class PseudoPosteriorKernel(LinearKernel):

    def check(self, obs):
        super().check(obs)
        values = obs.values
        if np.any(values < -SIMPLEX_TOLERANCE):
            raise KernelDomainError("Pseudo-posterior observations must be nonnegative")
        bad = np.flatnonzero(np.abs(values.sum(axis=1) - 1.0) > SIMPLEX_TOLERANCE)
        if bad.size:
            raise KernelDomainError(
                "Pseudo-posterior observation {} does not sum to 1".format(int(bad[0]) + 1))

    def evaluate(self, y, y2):
        for vec in (y, y2):
            if np.any(vec < -SIMPLEX_TOLERANCE) or abs(np.sum(vec) - 1.0) > SIMPLEX_TOLERANCE:
                raise KernelDomainError("Pseudo-posterior observations must be probability vectors")
        return super().evaluate(y, y2)


NAME = 'pseudo-posterior'
KernelCls = PseudoPosteriorKernel
