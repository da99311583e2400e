"""Kernels over observations and Gram matrices of labels.

Kernel implementations live in gramdet/kernels, one module per kind, each
exposing NAME and KernelCls. The KernelManager registers the modules listed
under gramdet.kernel_modules in the config.
"""
import importlib
import logging
from dataclasses import dataclass
from enum import Enum, unique
from typing import Optional

import numpy as np

from gramdet.core import matcore
from gramdet.core.exceptions import ConfigFileError, KernelDomainError, ParameterError, ShapeError

DEFAULT_KERNEL_MODULES = ('delta', 'linear', 'rbf', 'pseudo_posterior')
BLOCK_SIZE = 1024
MEDIAN_SUBSAMPLE = 256
SIMPLEX_TOLERANCE = 1e-9


@unique
class ObservationVariant(Enum):
    CATEGORICAL = 'categorical'
    EMBEDDING = 'embedding'


class ObservationSet:

    """Per-record observations: categorical ids in 1..k or width-m real vectors."""

    __slots__ = ["_variant", "_values", "_k", "_categories"]

    def __init__(self, variant, values, k=None, categories=()):
        self._variant = ObservationVariant(variant)
        if self._variant is ObservationVariant.CATEGORICAL:
            values = np.asarray(values).astype(np.int64)
            if values.ndim != 1:
                raise ShapeError("Categorical observations must be a 1-D sequence")
            if values.size and values.min() < 1:
                raise ShapeError("Categorical observation ids start at 1")
            k = int(values.max()) if k is None and values.size else int(k or 0)
            if values.size and values.max() > k:
                raise ShapeError("Categorical observation ids must lie in 1..{}".format(k))
        else:
            values = np.asarray(values, dtype=float)
            if values.ndim == 1:
                values = values[:, None]
            if values.ndim != 2:
                raise ShapeError("Embedding observations must be an N x m array")
            if not np.all(np.isfinite(values)):
                raise ShapeError("Embedding observations must be finite")
            k = values.shape[1]
        if len(values) == 0:
            raise ShapeError("An observation set needs at least one record")
        values.flags.writeable = False
        self._values = values
        self._k = k
        self._categories = tuple(categories)

    @classmethod
    def categorical(cls, ids, k=None, categories=()):
        return cls(ObservationVariant.CATEGORICAL, ids, k, categories)

    @classmethod
    def embedding(cls, vectors):
        return cls(ObservationVariant.EMBEDDING, vectors)

    @property
    def variant(self):
        return self._variant

    @property
    def values(self):
        return self._values

    @property
    def k(self):
        """Alphabet size for categorical sets, vector width for embeddings."""
        return self._k

    @property
    def categories(self):
        """Original category names of categorical ids, if known."""
        return self._categories

    @property
    def is_categorical(self):
        return self._variant is ObservationVariant.CATEGORICAL

    def one_hot(self):
        """A categorical set as an embedding of indicator vectors."""
        if not self.is_categorical:
            raise KernelDomainError("Only categorical observations have a one-hot form")
        out = np.zeros((len(self), self._k))
        out[np.arange(len(self)), self._values - 1] = 1.0
        return ObservationSet.embedding(out)

    def take(self, indices):
        return ObservationSet(self._variant, self._values[indices], self._k, self._categories)

    def __len__(self):
        return len(self._values)

    def __repr__(self):
        return '<ObservationSet {} N={} k={}>'.format(self._variant.value, len(self), self._k)


@dataclass(frozen=True)
class KernelSpec:

    """Which kernel to use; sigma only applies to rbf and may be left to the median heuristic."""

    kind: str = 'delta'
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.sigma is not None:
            if self.kind != 'rbf':
                raise ParameterError("Only the rbf kernel takes a bandwidth")
            if not self.sigma > 0:
                raise ParameterError("rbf sigma must be positive, got {}".format(self.sigma))

    @classmethod
    def parse(cls, text):
        """Parse the 'delta | linear | rbf[:SIGMA] | pseudo-posterior' grammar."""
        kind, _, sigma = text.strip().partition(':')
        if sigma:
            try:
                return cls(kind, float(sigma))
            except ValueError:
                raise ParameterError("Bad rbf bandwidth '{}'".format(sigma))
        return cls(kind)

    def resolved(self, sigma):
        return KernelSpec(self.kind, sigma)

    def __str__(self):
        if self.sigma is not None:
            return '{}:{:g}'.format(self.kind, self.sigma)
        return self.kind


class LabelGram:

    """Symmetric PSD d x d matrix of kernel inner products between label distributions."""

    __slots__ = ["_g"]

    def __init__(self, g):
        g = matcore.as_matrix(g)
        g = (g + g.T) / 2
        g.flags.writeable = False
        self._g = g

    @property
    def g(self):
        return self._g

    @property
    def d(self):
        return self._g.shape[0]

    def det(self):
        return matcore.det(self._g)

    def __repr__(self):
        return '<LabelGram d={}>'.format(self.d)


class KernelBase:

    """Parent class for kernel implementations.

    Subclasses set variant and implement pairwise(). report_gram() computes
    the unnormalized per-label kernel sums A^T K A in N x N blocks;
    subclasses with a finite feature map override it.
    """

    variant = ObservationVariant.EMBEDDING

    def __init__(self, spec):
        self.spec = spec

    @property
    def name(self):
        return self.spec.kind

    def check(self, obs):
        """Raise KernelDomainError unless obs is in this kernel's domain."""
        if obs.variant is not self.variant:
            raise KernelDomainError("The {} kernel needs {} observations, got {}".format(
                self.name, self.variant.value, obs.variant.value))

    def pairwise(self, a, b):
        """Kernel values between every row of a and every row of b."""
        raise NotImplementedError

    def evaluate(self, y, y2):
        return float(self.pairwise(np.asarray([y]), np.asarray([y2]))[0, 0])

    def finite_matrix(self, k):
        """k x k kernel matrix on a finite alphabet, if the kernel defines one."""
        del k
        return None

    def report_gram(self, obs, onehot, kernel_matrix=None):
        """Sum of K(y_n, y_n') over record pairs grouped by reported label."""
        if kernel_matrix is not None:
            return onehot.T @ kernel_matrix @ onehot
        values = obs.values
        n = len(values)
        out = np.zeros((onehot.shape[1], onehot.shape[1]))
        for start in range(0, n, BLOCK_SIZE):
            stop = min(start + BLOCK_SIZE, n)
            block = self.pairwise(values[start:stop], values)
            out += onehot[start:stop].T @ block @ onehot
        return out


class KernelManager:

    """Registry of kernel implementations by name."""

    def __init__(self, modules=DEFAULT_KERNEL_MODULES):
        self.log = logging.getLogger('KernelManager')
        self.modules = tuple(modules)
        self._kernels = dict()
        for module in self.modules:
            # bare names are modules of gramdet.kernels
            path = module if '.' in module else 'gramdet.kernels.{}'.format(module)
            i = importlib.import_module(path)
            self.register_kernel(getattr(i, 'NAME'), getattr(i, 'KernelCls'))

    @property
    def kernels(self):
        return self._kernels

    def register_kernel(self, name, kernel_cls):
        self._kernels[name] = kernel_cls

    def get_kernel(self, spec):
        try:
            return self._kernels[spec.kind](spec)
        except KeyError:
            raise KernelDomainError("Unknown kernel '{}'. Known kernels: {}".format(
                spec.kind, ', '.join(sorted(self._kernels))))


_default_manager = None


def default_manager():
    """The process-wide manager, with the built-in kernels unless configured otherwise."""
    global _default_manager     # pylint: disable-msg=global-statement
    if _default_manager is None:
        _default_manager = KernelManager()
    return _default_manager


def configure_kernels(modules):
    """Replace the process-wide manager with one registering the given modules."""
    global _default_manager     # pylint: disable-msg=global-statement
    try:
        _default_manager = KernelManager(modules)
    except ImportError as e:
        raise ConfigFileError("Cannot load kernel module: {}".format(e), 'gramdet.kernel_modules')
    return _default_manager


def get_kernel(spec):
    return default_manager().get_kernel(spec)


def _observation_variant(y):
    if isinstance(y, (int, np.integer)):
        return ObservationVariant.CATEGORICAL
    return ObservationVariant.EMBEDDING


def kernel_eval(spec, y, y2):
    """K(y, y2) for two single observations."""
    variant = _observation_variant(y)
    if variant is not _observation_variant(y2):
        raise KernelDomainError("Observations differ in variant")
    if variant is ObservationVariant.EMBEDDING:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        y2 = np.atleast_1d(np.asarray(y2, dtype=float))
        if y.shape != y2.shape:
            raise KernelDomainError("Embedding widths differ: {} vs {}".format(y.size, y2.size))
    kernel = get_kernel(spec)
    if variant is not kernel.variant:
        raise KernelDomainError("The {} kernel needs {} observations".format(
            spec.kind, kernel.variant.value))
    if spec.kind == 'rbf' and spec.sigma is None:
        raise ParameterError("rbf needs a bandwidth to evaluate single pairs")
    return kernel.evaluate(y, y2)


def median_heuristic_sigma(obs, sample_size=MEDIAN_SUBSAMPLE, seed=0):
    """Median pairwise distance over a seeded subsample of the observations."""
    values = obs.values
    if obs.is_categorical:
        raise KernelDomainError("The median heuristic needs embedding observations")
    if len(values) > sample_size:
        values = values[np.random.default_rng(seed).choice(len(values), sample_size, replace=False)]
    sq = np.sum(values ** 2, axis=1)
    dist2 = np.maximum(sq[:, None] + sq[None, :] - 2 * values @ values.T, 0.0)
    upper = np.sqrt(dist2[np.triu_indices(len(values), k=1)])
    upper = upper[upper > 0]
    if upper.size == 0:
        return 1.0
    return float(np.median(upper))


def resolve_spec(spec, obs, sample_size=MEDIAN_SUBSAMPLE):
    """Fill in the rbf bandwidth by the median heuristic when it is unset."""
    if spec.kind == 'rbf' and spec.sigma is None:
        sigma = median_heuristic_sigma(obs, sample_size)
        logging.getLogger('KernelManager').debug("rbf bandwidth from median heuristic: %s", sigma)
        return spec.resolved(sigma)
    return spec


def kernel_matrix(spec, obs_a, obs_b):
    """Kernel values between all records of two observation sets."""
    kernel = get_kernel(spec)
    kernel.check(obs_a)
    kernel.check(obs_b)
    return kernel.pairwise(obs_a.values, obs_b.values)


def label_gram(p, spec=KernelSpec(), kmat=None, support=None):
    """G_K = P^T K P for an experiment over a finite observation alphabet.

    kmat is the |Y| x |Y| kernel matrix; when omitted it comes from the
    kernel's own finite form (identity for delta) or from evaluating the
    kernel on support, an ObservationSet with one observation per row of P.
    """
    p = p.p if hasattr(p, 'p') else matcore.as_matrix(p)
    if not matcore.check(p, matcore.PredicateKind.COLUMN_STOCHASTIC, 1e-9):
        raise ShapeError("Experiment matrix must be column stochastic")
    rows = p.shape[0]

    if kmat is None:
        kernel = get_kernel(spec)
        kmat = kernel.finite_matrix(rows)
        if kmat is None:
            if support is None:
                raise KernelDomainError(
                    "The {} kernel needs a kernel matrix or support observations".format(spec.kind))
            if len(support) != rows:
                raise ShapeError("Support has {} observations for {} experiment rows".format(
                    len(support), rows))
            kmat = kernel_matrix(resolve_spec(spec, support), support, support)
    kmat = matcore.as_matrix(kmat)
    if kmat.shape != (rows, rows):
        raise ShapeError("Kernel matrix is {}, experiment has {} rows".format(kmat.shape, rows))
    return LabelGram(p.T @ kmat @ p)
