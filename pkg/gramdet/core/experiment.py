"""Experiment matrices and joint distributions over (observation, label)."""
import numpy as np

from gramdet.core import matcore
from gramdet.core.exceptions import ShapeError

STOCHASTIC_TOLERANCE = 1e-12
INDEPENDENCE_TOLERANCE = 1e-12


class ExperimentMatrix:

    """Column-stochastic |Y| x d matrix; column x is the observation law of label x."""

    __slots__ = ["_p"]

    def __init__(self, p, tolerance=STOCHASTIC_TOLERANCE):
        p = matcore.as_matrix(p).copy()
        if np.any(p < 0):
            raise ShapeError("Experiment matrix entries must be nonnegative")
        if not np.all(np.abs(p.sum(axis=0) - 1.0) <= tolerance):
            raise ShapeError("Experiment matrix columns must each sum to 1")
        p.flags.writeable = False
        self._p = p

    @classmethod
    def normalized(cls, weights):
        """Build an experiment by normalizing the columns of a nonnegative matrix."""
        weights = matcore.as_matrix(weights)
        return cls(weights / weights.sum(axis=0, keepdims=True))

    @property
    def p(self):
        return self._p

    @property
    def d(self):
        """Number of labels (columns)."""
        return self._p.shape[1]

    @property
    def k(self):
        """Size of the observation alphabet (rows)."""
        return self._p.shape[0]

    def gram(self):
        """P^T P, the delta-kernel Gram matrix of labels."""
        return self._p.T @ self._p

    def is_independent(self):
        """True when the columns are linearly independent."""
        return matcore.det(self.gram()) > INDEPENDENCE_TOLERANCE

    def __repr__(self):
        return '<ExperimentMatrix {}x{}>'.format(self.k, self.d)


class JointDistribution:

    """Nonnegative |Y| x d matrix summing to one: the law of (y, reported label)."""

    __slots__ = ["_j"]

    def __init__(self, j, tolerance=STOCHASTIC_TOLERANCE):
        j = matcore.as_matrix(j).copy()
        if np.any(j < 0):
            raise ShapeError("Joint distribution entries must be nonnegative")
        if abs(j.sum() - 1.0) > tolerance:
            raise ShapeError("Joint distribution must sum to 1, got {}".format(j.sum()))
        j.flags.writeable = False
        self._j = j

    @classmethod
    def from_counts(cls, counts):
        counts = np.asarray(counts, dtype=float)
        return cls(counts / counts.sum())

    @classmethod
    def from_experiment(cls, experiment, q):
        """The joint P Q of an experiment and a misreport matrix."""
        return cls(experiment.p @ np.asarray(q, dtype=float))

    @property
    def j(self):
        return self._j

    @property
    def mu_y(self):
        return self._j.sum(axis=1)

    @property
    def mu_xhat(self):
        return self._j.sum(axis=0)

    def __repr__(self):
        return '<JointDistribution {}x{}>'.format(*self._j.shape)
