"""True and reported label sets, misreport matrices and reliability orderings.

Counts are kept as integers and only turned into frequencies on demand, so
traces, marginals and Hamming distances stay exact.
"""
import os
from dataclasses import dataclass, field
from enum import Enum, unique
from fractions import Fraction
from typing import Optional

import numpy as np

from gramdet.core import matcore
from gramdet.core.config_loader import load_yaml_file
from gramdet.core.exceptions import ParameterError, ShapeError
from gramdet.core.matcore import PredicateKind

CLASS_TOLERANCE = 1e-12
WITNESS_TOLERANCE = 1e-9


class Labels:

    """A sequence of 1-based label ids over an alphabet of size d."""

    __slots__ = ["_values", "_d"]

    def __init__(self, values, d=None):
        values = np.asarray(values)
        if values.ndim != 1:
            raise ShapeError("Labels must be a 1-D sequence")
        if values.size == 0:
            raise ShapeError("Labels need at least one record")
        if not np.issubdtype(values.dtype, np.integer):
            if not np.all(np.equal(np.mod(values, 1), 0)):
                raise ShapeError("Label ids must be integers")
        values = values.astype(np.int64)
        if d is None:
            d = int(values.max())
        d = int(d)
        if values.min() < 1 or values.max() > d:
            raise ShapeError("Label ids must lie in 1..{}".format(d))
        values.flags.writeable = False
        self._values = values
        self._d = d

    @property
    def values(self):
        return self._values

    @property
    def d(self):
        return self._d

    @property
    def zero_based(self):
        """Values shifted to 0..d-1 for indexing."""
        return self._values - 1

    def with_alphabet(self, d):
        """The same labels over a (possibly larger) alphabet."""
        return Labels(self._values, d)

    def occurrences(self):
        """Per-label counts, length d."""
        return np.bincount(self.zero_based, minlength=self._d)

    def frequencies(self):
        return self.occurrences() / len(self)

    def one_hot(self):
        """N x d indicator matrix of the labels."""
        out = np.zeros((len(self), self._d))
        out[np.arange(len(self)), self.zero_based] = 1.0
        return out

    def __len__(self):
        return self._values.size

    def __eq__(self, other):
        if not isinstance(other, Labels):
            return NotImplemented
        return self._d == other.d and np.array_equal(self._values, other.values)

    def __hash__(self):
        return hash((self._d, self._values.tobytes()))

    def __repr__(self):
        return '<Labels N={} d={}>'.format(len(self), self._d)


class MisreportCounts:

    """Integer joint counts of (true label, reported label) pairs."""

    __slots__ = ["_counts"]

    def __init__(self, counts):
        counts = np.asarray(counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ShapeError("Misreport counts must be a square matrix")
        if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
            raise ShapeError("Misreport counts must be nonnegative integers")
        counts = counts.astype(np.int64)
        if counts.sum() < 1:
            raise ShapeError("Misreport counts must cover at least one record")
        counts.flags.writeable = False
        self._counts = counts

    @property
    def counts(self):
        return self._counts

    @property
    def n_total(self):
        return int(self._counts.sum())

    @property
    def d(self):
        return self._counts.shape[0]

    @property
    def q(self):
        """The misreport matrix Q = counts / N."""
        return self._counts / self.n_total

    @property
    def matches(self):
        return int(np.trace(self._counts))

    @property
    def mismatches(self):
        return self.n_total - self.matches

    @property
    def hamming_fraction(self):
        """1 - Tr(Q) as an exact fraction."""
        return Fraction(self.mismatches, self.n_total)

    def __repr__(self):
        return '<MisreportCounts d={} N={}>'.format(self.d, self.n_total)


@dataclass(frozen=True)
class FrequencyDecomposition:

    """Marginals and conditionals of a misreport matrix."""

    q_x: np.ndarray
    q_xhat: np.ndarray
    q_xhat_given_x: np.ndarray
    q_x_given_xhat: np.ndarray


@unique
class MatrixClassKind(Enum):
    NONPERM = 'nonperm'
    REG = 'reg'
    DOM = 'dom'
    BALANCED = 'balanced'
    BALANCED_DELTA = 'balanced-delta'


@dataclass(frozen=True)
class MatrixClass:

    """A misreport-matrix class, optionally with balance L and Hamming bound delta."""

    kind: MatrixClassKind
    balance: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', MatrixClassKind(self.kind))
        if self.kind in (MatrixClassKind.BALANCED, MatrixClassKind.BALANCED_DELTA):
            if self.balance is None or self.balance < 1:
                raise ParameterError("Balance L must be >= 1 for {}".format(self.kind.value))
        if self.kind is MatrixClassKind.BALANCED_DELTA:
            if self.delta is None or not 0 < self.delta <= 1:
                raise ParameterError("delta must be in (0, 1] for balanced-delta")

    @classmethod
    def parse(cls, text):
        """Parse 'reg', 'balanced:L' or 'balanced-delta:L:delta'."""
        parts = text.split(':')
        try:
            kind = MatrixClassKind(parts[0])
        except ValueError:
            raise ParameterError("Unknown matrix class '{}'".format(parts[0]))
        try:
            numbers = [float(x) for x in parts[1:]]
        except ValueError:
            raise ParameterError("Bad matrix class parameters in '{}'".format(text))
        return cls(kind, *numbers)

    def __str__(self):
        if self.kind is MatrixClassKind.BALANCED:
            return 'balanced:{:g}'.format(self.balance)
        if self.kind is MatrixClassKind.BALANCED_DELTA:
            return 'balanced-delta:{:g}:{:g}'.format(self.balance, self.delta)
        return self.kind.value


@unique
class OrderingKind(Enum):
    EXACT = 'exact'
    BLACKWELL = 'blackwell'
    HAMMING = 'hamming'
    DIST = 'dist'


@dataclass(frozen=True)
class OrderingSpec:

    """A reliability ordering; hamming and dist take a margin factor alpha."""

    kind: OrderingKind
    alpha: float = 1.0
    table: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'kind', OrderingKind(self.kind))
        if not 0 < self.alpha <= 1:
            raise ParameterError("alpha must be in (0, 1], got {}".format(self.alpha))
        if self.kind is OrderingKind.DIST:
            if self.table is None:
                raise ParameterError("dist ordering needs a distance table")
            object.__setattr__(self, 'table', validate_dist_table(self.table))


@dataclass(frozen=True)
class BlackwellWitness:

    """The garbling T relating two conditional misreport matrices."""

    t: Optional[np.ndarray]
    is_witness: bool


class OrderingVerdict:

    """Result of an ordering check; truthy when the ordering holds."""

    __slots__ = ["holds", "witness"]

    def __init__(self, holds, witness=None):
        self.holds = bool(holds)
        self.witness = witness

    def __bool__(self):
        return self.holds

    def __repr__(self):
        return '<OrderingVerdict {}>'.format(self.holds)


def validate_dist_table(table):
    table = matcore.as_matrix(table)
    if table.shape[0] != table.shape[1]:
        raise ShapeError("Distance table must be square")
    if np.any(np.diag(table) != 0):
        raise ParameterError("Distance table must have a zero diagonal")
    if not np.array_equal(table, table.T):
        raise ParameterError("Distance table must be symmetric")
    off = ~np.eye(table.shape[0], dtype=bool)
    if np.any(table[off] <= 0):
        raise ParameterError("Off-diagonal distances must be positive")
    table = table.copy()
    table.flags.writeable = False
    return table


def hamming_table(d):
    """The distance table whose dist sum is the Hamming distance."""
    return 1.0 - np.eye(d)


def aspect_ratio(table):
    """Largest distance over smallest off-diagonal distance."""
    table = validate_dist_table(table)
    if table.shape[0] < 2:
        return 1.0
    off = table[~np.eye(table.shape[0], dtype=bool)]
    return float(off.max() / off.min())


def _check_pair(a, b):
    if len(a) != len(b):
        raise ShapeError("Label sequences differ in length: {} vs {}".format(len(a), len(b)))
    if a.d != b.d:
        raise ShapeError("Label alphabets differ: {} vs {}".format(a.d, b.d))


def misreport_matrix(truth, report):
    """Joint counts of (truth, report) pairs."""
    _check_pair(truth, report)
    d = truth.d
    flat = truth.zero_based * d + report.zero_based
    return MisreportCounts(np.bincount(flat, minlength=d * d).reshape(d, d))


def _normalize_columns(m, sums):
    d = m.shape[0]
    out = np.full(m.shape, 1.0 / d)
    nonzero = sums > 0
    out[:, nonzero] = m[:, nonzero] / sums[nonzero]
    return out


def decompose(q):
    """Marginals and column-stochastic conditionals of Q.

    Columns for labels with zero marginal are filled with 1/d.
    """
    counts = q.counts.astype(float)
    n = q.n_total
    true_counts = counts.sum(axis=1)
    report_counts = counts.sum(axis=0)
    return FrequencyDecomposition(
        q_x=true_counts / n,
        q_xhat=report_counts / n,
        # column j: distribution of reported label given true label j
        q_xhat_given_x=_normalize_columns(counts.T, true_counts),
        q_x_given_xhat=_normalize_columns(counts, report_counts))


def _joint(q):
    return q.q if isinstance(q, MisreportCounts) else matcore.as_matrix(q)


def is_regular(q):
    """Q invertible and row diagonally maximal."""
    qm = _joint(q)
    return (not matcore.is_singular(qm) and
            matcore.check(qm, PredicateKind.ROW_DIAGONALLY_MAXIMAL, CLASS_TOLERANCE))


def class_member(q, matrix_class):
    """Whether the misreport matrix belongs to a class."""
    kind = matrix_class.kind
    qm = q.q

    if kind is MatrixClassKind.NONPERM:
        conditional = decompose(q).q_xhat_given_x
        return not (matcore.check(conditional, PredicateKind.IDENTITY, WITNESS_TOLERANCE) or
                    matcore.check(conditional, PredicateKind.PERMUTATION, WITNESS_TOLERANCE))

    if kind is MatrixClassKind.REG:
        return is_regular(qm)

    if not matcore.check(qm, PredicateKind.ROW_DIAGONALLY_DOMINANT, CLASS_TOLERANCE):
        return False
    if kind is MatrixClassKind.DOM:
        return True

    q_x = qm.sum(axis=1)
    if np.any(q_x[:, None] > matrix_class.balance * q_x[None, :] + CLASS_TOLERANCE):
        return False
    if kind is MatrixClassKind.BALANCED:
        return True

    return q.hamming_fraction <= Fraction(matrix_class.delta)


def blackwell_witness(truth, a, b):
    """Candidate garbling T with T Q_a = Q_b on the conditional misreport matrices.

    Only meaningful when both misreport matrices are regular; otherwise no
    witness is produced.
    """
    qa = misreport_matrix(truth, a)
    qb = misreport_matrix(truth, b)
    if not (is_regular(qa) and is_regular(qb)):
        return BlackwellWitness(None, False)

    t = decompose(qb).q_xhat_given_x @ matcore.inverse(decompose(qa).q_xhat_given_x)
    valid = (matcore.check(t, PredicateKind.COLUMN_STOCHASTIC, WITNESS_TOLERANCE) and
             not matcore.check(t, PredicateKind.IDENTITY, WITNESS_TOLERANCE))
    return BlackwellWitness(t, valid)


def hamming_distance(a, b):
    """Number of positions where a and b disagree."""
    if len(a) != len(b):
        raise ShapeError("Label sequences differ in length: {} vs {}".format(len(a), len(b)))
    return int(np.count_nonzero(a.values != b.values))


def dist_sum(a, b, table):
    """Sum of table(a_n, b_n) over records."""
    if len(a) != len(b):
        raise ShapeError("Label sequences differ in length: {} vs {}".format(len(a), len(b)))
    table = validate_dist_table(table)
    if max(a.d, b.d) > table.shape[0]:
        raise ShapeError("Distance table is smaller than the label alphabet")
    return float(table[a.zero_based, b.zero_based].sum())


def ordering_holds(truth, a, b, spec):
    """Whether report a is strictly more reliable than report b under spec."""
    _check_pair(truth, a)
    _check_pair(truth, b)
    kind = spec.kind

    if kind is OrderingKind.EXACT:
        return OrderingVerdict(a == truth and b != truth)

    if kind is OrderingKind.HAMMING:
        return OrderingVerdict(
            hamming_distance(a, truth) < spec.alpha * hamming_distance(b, truth))

    if kind is OrderingKind.DIST:
        return OrderingVerdict(
            dist_sum(a, truth, spec.table) < spec.alpha * dist_sum(b, truth, spec.table))

    witness = blackwell_witness(truth, a, b)
    return OrderingVerdict(witness.is_witness, witness)


def bounded_ratio_interval(d, balance):
    """Range of every true-label frequency when the truth is L-balanced."""
    if d < 1 or balance < 1:
        raise ParameterError("Need d >= 1 and L >= 1")
    return 1.0 / (balance * d - balance + 1), balance / (d + balance - 1)


def hamming_det_bracket(q):
    """Bounds on det(Q) / prod q_x(i) from the Hamming fraction.

    Returns (lower, upper), or None when 1 - Tr(Q) is not below
    min q_x / 4 and the bracket does not apply.
    """
    qm = _joint(q)
    d = qm.shape[0]
    q_x = qm.sum(axis=1)
    delta = 1.0 - float(np.trace(qm))
    low, high = float(q_x.min()), float(q_x.max())
    if low <= 0 or delta >= low / 4:
        return None
    spread = 8 * d * delta ** 2 / low ** 2
    return (1 - spread) * (1 - delta / low), (1 + spread) * (1 - delta / (2 * high))


def blackwell_collision(experiment, null_vector, epsilon=0.1):
    """Two regular misreport matrices a linearly dependent experiment cannot tell apart.

    null_vector is a nonzero integer vector with P v = 0. Returns (Q, T)
    where Q is invertible and row diagonally maximal, T is a column
    stochastic non-identity garbling, and P Q = P Q T^T.
    """
    p = experiment.p if hasattr(experiment, 'p') else matcore.as_matrix(experiment)
    v = np.asarray(null_vector, dtype=float)
    if v.shape != (p.shape[1], ) or not np.any(v):
        raise ParameterError("Null vector must be nonzero with one entry per label")
    if not np.allclose(p @ v, 0.0, atol=1e-12):
        raise ParameterError("Vector is not in the null space of the experiment")
    if not 0 < epsilon < 0.5:
        raise ParameterError("epsilon must be in (0, 0.5)")

    plus, minus = np.maximum(v, 0.0), np.maximum(-v, 0.0)
    top, bottom = int(np.argmax(plus)), int(np.argmax(minus))
    scale = float(np.abs(v).max())

    a = scale * np.eye(v.size)
    a[:, top] = plus
    a[:, bottom] = minus
    q = a / a.sum()

    t = np.eye(v.size)
    t[top, top] = t[bottom, bottom] = 1 - epsilon
    t[top, bottom] = t[bottom, top] = epsilon
    return q, t


COUNTEREXAMPLE_FILE = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                                   'fixtures', 'hamming_counterexample.yaml')


def counterexample_fixtures():
    """Experiment/report triples on which no score can follow the Hamming ordering.

    Returns a list of (P, Q, Q') triples with P_1 Q_1 = P_2 Q_2 and
    P_1 Q_1' = P_2 Q_2' while the Hamming ordering of (Q, Q') flips.
    """
    data = load_yaml_file(COUNTEREXAMPLE_FILE)
    triples = []
    for name in ('first', 'second'):
        entry = data[name]
        triples.append(tuple(
            [np.asarray(entry['experiment'], dtype=float)] +
            [entry[key]['scale'] * np.asarray(entry[key]['matrix'], dtype=float)
             for key in ('q', 'q_prime')]))
    return triples
