"""Linear kernel on embeddings: the dot product of feature vectors."""
import numpy as np

from gramdet.core.kernels import KernelBase


class LinearKernel(KernelBase):

    def pairwise(self, a, b):
        return np.asarray(a, dtype=float) @ np.asarray(b, dtype=float).T

    def report_gram(self, obs, onehot, kernel_matrix=None):
        if kernel_matrix is not None:
            return super().report_gram(obs, onehot, kernel_matrix)
        sums = onehot.T @ obs.values
        return sums @ sums.T


NAME = 'linear'
KernelCls = LinearKernel
