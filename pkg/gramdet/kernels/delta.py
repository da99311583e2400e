"""Delta kernel on categorical observations: K(y, y') = 1[y = y']."""
import numpy as np

from gramdet.core.kernels import KernelBase, ObservationVariant


class DeltaKernel(KernelBase):

    variant = ObservationVariant.CATEGORICAL

    def pairwise(self, a, b):
        return (np.asarray(a)[:, None] == np.asarray(b)[None, :]).astype(float)

    def finite_matrix(self, k):
        return np.eye(k)

    def report_gram(self, obs, onehot, kernel_matrix=None):
        if kernel_matrix is not None:
            return super().report_gram(obs, onehot, kernel_matrix)
        # V[y, x] counts records with observation y reported as x
        counts = np.zeros((obs.k, onehot.shape[1]))
        np.add.at(counts, obs.values - 1, onehot)
        return counts.T @ counts


NAME = 'delta'
KernelCls = DeltaKernel
