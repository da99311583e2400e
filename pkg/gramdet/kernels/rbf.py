"""Gaussian RBF kernel: K(y, y') = exp(-|y - y'|^2 / sigma^2)."""
import numpy as np

from gramdet.core.exceptions import ParameterError
from gramdet.core.kernels import KernelBase


class RbfKernel(KernelBase):

    @property
    def sigma(self):
        if self.spec.sigma is None:
            raise ParameterError("rbf bandwidth is unresolved")
        return self.spec.sigma

    def pairwise(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        dist2 = np.sum(a ** 2, axis=1)[:, None] + np.sum(b ** 2, axis=1)[None, :] - 2 * a @ b.T
        return np.exp(-np.maximum(dist2, 0.0) / self.sigma ** 2)


NAME = 'rbf'
KernelCls = RbfKernel
