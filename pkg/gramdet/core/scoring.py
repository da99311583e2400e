"""Reliability scores.

The Gram determinant score with a known experiment, its plug-in and
stratified-matching estimators from observations, and the whitened
joint-distribution baselines.
"""
import itertools
import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Optional

import numpy as np

from gramdet.core import matcore
from gramdet.core.dataset import MisreportCounts
from gramdet.core.exceptions import KernelDomainError, ParameterError, ShapeError
from gramdet.core.experiment import ExperimentMatrix, JointDistribution
from gramdet.core.kernels import KernelSpec, get_kernel, label_gram, resolve_spec
from gramdet.core.seeds import derive_seed, rng as make_rng

log = logging.getLogger('Scoring')


@unique
class Estimator(Enum):
    PARTIAL_KNOWLEDGE = 'partial-knowledge'
    PLUGIN = 'plug-in'
    STRATIFIED = 'stratified'

    @classmethod
    def parse(cls, text):
        aliases = {'plugin': cls.PLUGIN, 'plug-in': cls.PLUGIN, 'stratified': cls.STRATIFIED,
                   'partial-knowledge': cls.PARTIAL_KNOWLEDGE}
        try:
            return aliases[text]
        except KeyError:
            raise ParameterError("Unknown estimator '{}', use plugin or stratified".format(text))


@dataclass(frozen=True)
class ScoreReport:

    """An estimator's output plus the diagnostics needed to trust it."""

    value: float
    estimator: Estimator
    kernel: KernelSpec
    n: int
    seed: Optional[int] = None
    min_occurrence: int = 0
    degenerate: bool = False
    imbalance: float = math.inf
    repetitions: int = 1
    std_error: Optional[float] = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.estimator is Estimator.STRATIFIED and self.seed is None:
            raise ParameterError("Stratified score reports must carry their seed")

    def to_dict(self):
        return {
            'value': self.value,
            'estimator': self.estimator.value,
            'kernel': str(self.kernel),
            'n': self.n,
            'seed': self.seed,
            'repetitions': self.repetitions,
            'std_error': self.std_error,
            'diagnostics': {
                'min_occurrence': self.min_occurrence,
                'degenerate': self.degenerate,
                'imbalance': None if math.isinf(self.imbalance) else self.imbalance,
            },
        }


def _joint_matrix(q):
    if isinstance(q, MisreportCounts):
        return q.q
    return matcore.as_matrix(q)


def expected_gram(p, q, kernel=KernelSpec(), kmat=None, support=None):
    """Q^T G_K Q, the Gram matrix the plug-in estimator converges to."""
    qm = _joint_matrix(q)
    g = label_gram(p, kernel, kmat, support).g
    if g.shape[0] != qm.shape[0]:
        raise ShapeError("Experiment has {} labels, misreport matrix {}".format(g.shape[0], qm.shape[0]))
    return qm.T @ g @ qm


def gram_score(p, q, kernel=KernelSpec(), kmat=None, support=None):
    """det(Q^T G_K Q) for a known experiment."""
    return matcore.det(expected_gram(p, q, kernel, kmat, support))


def _check_inputs(report, obs, kernel):
    if len(report) != len(obs):
        raise ShapeError("Report has {} records, observations {}".format(len(report), len(obs)))
    kernel.check(obs)
    if kernel.name == 'pseudo-posterior' and obs.k != report.d:
        raise KernelDomainError("Pseudo-posterior observations have width {}, expected {}".format(
            obs.k, report.d))
    if kernel.name == 'linear' and obs.k < report.d:
        log.warning("Linear kernel on width %s embeddings cannot separate %s labels, the score is 0",
                    obs.k, report.d)


def _diagnostics(report):
    occurrences = report.occurrences()
    low = int(occurrences.min())
    imbalance = math.inf if low == 0 else float(occurrences.max() / low)
    return low, imbalance


def plugin_gram(report, obs, kernel=KernelSpec(), kernel_matrix=None):
    """Empirical Gram matrix (1/N^2) sum K(y_n, y_n') over record pairs by reported label.

    Self-pairs n = n' are included. kernel_matrix may carry precomputed
    K(y_n, y_n') values shared by several reports on the same observations.
    """
    spec = resolve_spec(kernel, obs)
    impl = get_kernel(spec)
    _check_inputs(report, obs, impl)
    n = len(report)
    return impl.report_gram(obs, report.one_hot(), kernel_matrix) / n ** 2


def plugin_score(report, obs, kernel=KernelSpec(), kernel_matrix=None):
    """Plug-in Gram determinant score of a report."""
    spec = resolve_spec(kernel, obs)
    low, imbalance = _diagnostics(report)
    if low == 0:
        _check_inputs(report, obs, get_kernel(spec))
        log.debug("Label absent from report, plug-in score is 0")
        return ScoreReport(0.0, Estimator.PLUGIN, spec, len(report), min_occurrence=0,
                           degenerate=True, imbalance=imbalance)
    value = matcore.det(plugin_gram(report, obs, spec, kernel_matrix))
    return ScoreReport(value, Estimator.PLUGIN, spec, len(report), min_occurrence=low,
                       imbalance=imbalance)


def _permutation_sign(perm):
    sign = 1
    seen = np.zeros(len(perm), dtype=bool)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _stratified_draw(report, values, impl, weights, generator):
    d = report.d
    rows = np.empty(d, dtype=np.int64)
    cols = np.empty(d, dtype=np.int64)
    for label in range(d):
        members = np.flatnonzero(report.zero_based == label)
        picks = generator.choice(members.size, size=2, replace=False)
        # the first draw fills Col, the second Row from what is left
        cols[label] = members[picks[0]]
        rows[label] = members[picks[1]]
    sigma = generator.permutation(d)
    kvals = np.array([impl.pairwise(values[[rows[i]]], values[[cols[sigma[i]]]])[0, 0]
                      for i in range(d)])
    return float(math.factorial(d) * _permutation_sign(sigma) *
                 np.prod(kvals * weights * weights[sigma]))


def stratified_score(report, obs, kernel=KernelSpec(), seed=0):
    """One draw of the stratified-matching estimator."""
    spec = resolve_spec(kernel, obs)
    impl = get_kernel(spec)
    _check_inputs(report, obs, impl)
    low, imbalance = _diagnostics(report)
    if low < 2:
        log.debug("Minimum label occurrence %s < 2, stratified score is 0", low)
        return ScoreReport(0.0, Estimator.STRATIFIED, spec, len(report), seed=seed,
                           min_occurrence=low, degenerate=True, imbalance=imbalance)
    value = _stratified_draw(report, obs.values, impl, report.frequencies(), make_rng(seed))
    return ScoreReport(value, Estimator.STRATIFIED, spec, len(report), seed=seed,
                       min_occurrence=low, imbalance=imbalance)


def repeated_stratified_score(report, obs, kernel=KernelSpec(), seed=0, repetitions=1):
    """Mean of independent stratified draws with derived seeds, with its standard error."""
    if repetitions < 1:
        raise ParameterError("repetitions must be >= 1")
    spec = resolve_spec(kernel, obs)
    draws = [stratified_score(report, obs, spec, derive_seed(seed, r)) for r in range(repetitions)]
    values = np.array([r.value for r in draws])
    std_error = float(values.std(ddof=1) / math.sqrt(repetitions)) if repetitions > 1 else None
    first = draws[0]
    return ScoreReport(float(values.mean()), Estimator.STRATIFIED, spec, len(report), seed=seed,
                       min_occurrence=first.min_occurrence, degenerate=first.degenerate,
                       imbalance=first.imbalance, repetitions=repetitions, std_error=std_error)


def stratified_expectation(report, pair_matrix):
    """Exact expectation of the stratified estimator by full enumeration.

    pair_matrix[n, n'] is the (expected) kernel value between records n and
    n'. Enumerates every ordered (Col, Row) pick per label and every
    permutation, so it is only practical for a handful of records.
    """
    d = report.d
    pair_matrix = matcore.as_matrix(pair_matrix)
    if pair_matrix.shape != (len(report), len(report)):
        raise ShapeError("Pair matrix must be N x N")
    if report.occurrences().min() < 2:
        return 0.0
    weights = report.frequencies()
    members = [np.flatnonzero(report.zero_based == label) for label in range(d)]
    picks = [list(itertools.permutations(m, 2)) for m in members]
    perms = [(np.array(s), _permutation_sign(s)) for s in itertools.permutations(range(d))]

    total = 0.0
    count = 0
    for choice in itertools.product(*picks):
        cols = np.array([c for c, _ in choice])
        rows = np.array([r for _, r in choice])
        for sigma, sign in perms:
            total += sign * np.prod(pair_matrix[rows, cols[sigma]] * weights * weights[sigma])
            count += 1
    # each (Col, Row) pick is equally likely and sigma is uniform over d! permutations
    return float(math.factorial(d) * total / count)


def score_report(report, obs, kernel=KernelSpec(), estimator=Estimator.PLUGIN, seed=0,
                 repetitions=1, kernel_matrix=None):
    """Score with either estimator."""
    if estimator is Estimator.PLUGIN:
        return plugin_score(report, obs, kernel, kernel_matrix)
    if estimator is Estimator.STRATIFIED:
        if repetitions > 1:
            return repeated_stratified_score(report, obs, kernel, seed, repetitions)
        return stratified_score(report, obs, kernel, seed)
    raise ParameterError("Estimator {} needs a known experiment".format(estimator.value))


RankedReport = namedtuple('RankedReport', 'index name report')


def rank_reports(reports, obs, kernel=KernelSpec(), estimator=Estimator.PLUGIN, seed=0,
                 repetitions=1, names=None):
    """Score every report the same way and sort by descending score.

    Ties keep input order.
    """
    if len(reports) < 2:
        raise ParameterError("Ranking needs at least two reports")
    names = names or ['report{}'.format(i + 1) for i in range(len(reports))]
    spec = resolve_spec(kernel, obs)
    scored = [RankedReport(i, names[i], score_report(r, obs, spec, estimator, seed, repetitions))
              for i, r in enumerate(reports)]
    return sorted(scored, key=lambda r: -r.report.value)


def empirical_joint(report, obs):
    """Normalized counts of (observation, reported label) pairs."""
    if not obs.is_categorical:
        raise KernelDomainError("The empirical joint needs categorical observations")
    if len(report) != len(obs):
        raise ShapeError("Report has {} records, observations {}".format(len(report), len(obs)))
    counts = np.zeros((obs.k, report.d))
    np.add.at(counts, (obs.values - 1, report.zero_based), 1.0)
    return JointDistribution.from_counts(counts)


Whitened = namedtuple('Whitened', 'matrix dropped_rows dropped_cols')


def whiten(j):
    """D_y^-1/2 (J - mu_y mu_x^T) D_x^-1/2, dropping zero-marginal rows and columns."""
    jm = j.j if isinstance(j, JointDistribution) else matcore.as_matrix(j)
    mu_y, mu_x = jm.sum(axis=1), jm.sum(axis=0)
    keep_rows, keep_cols = mu_y > 0, mu_x > 0
    dropped_rows = tuple(int(i) for i in np.flatnonzero(~keep_rows))
    dropped_cols = tuple(int(i) for i in np.flatnonzero(~keep_cols))
    if dropped_rows or dropped_cols:
        log.debug("Whitening dropped rows %s and columns %s", dropped_rows, dropped_cols)
    jm = jm[keep_rows][:, keep_cols]
    mu_y, mu_x = mu_y[keep_rows], mu_x[keep_cols]
    centered = jm - np.outer(mu_y, mu_x)
    return Whitened(centered / np.sqrt(mu_y)[:, None] / np.sqrt(mu_x)[None, :],
                    dropped_rows, dropped_cols)


@unique
class BaselineKind(Enum):
    TOPK_VOLUME = 'topk-volume'
    MAX_CORRELATION = 'max-correlation'
    KYFAN = 'kyfan'
    CHI2_MI = 'chi2-mi'
    KL_MI = 'kl-mi'
    TV_MI = 'tv-mi'
    HELLINGER_MI = 'hellinger-mi'


@dataclass(frozen=True)
class BaselineSpec:

    """A baseline score kind; topk-volume and kyfan take k."""

    kind: BaselineKind
    k: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', BaselineKind(self.kind))

    @classmethod
    def parse(cls, text):
        kind, _, k = text.strip().partition(':')
        try:
            return cls(BaselineKind(kind), int(k) if k else None)
        except ValueError:
            raise ParameterError("Unknown baseline '{}'".format(text))

    def __str__(self):
        return '{}:{}'.format(self.kind.value, self.k) if self.k is not None else self.kind.value


def _independent_product(jm):
    return np.outer(jm.sum(axis=1), jm.sum(axis=0))


def baseline_score(j, kind, k=None):
    """Singular-value functionals of the whitened joint and mutual-information baselines."""
    if isinstance(kind, BaselineSpec):
        kind, k = kind.kind, kind.k if k is None else k
    kind = BaselineKind(kind)
    jm = j.j if isinstance(j, JointDistribution) else matcore.as_matrix(j)

    if kind is BaselineKind.KL_MI:
        joint, product = jm, _independent_product(jm)
        mask = joint > 0
        return float(np.sum(joint[mask] * np.log(joint[mask] / product[mask])))
    if kind is BaselineKind.TV_MI:
        joint, product = jm, _independent_product(jm)
        return float(0.5 * np.abs(joint - product).sum())
    if kind is BaselineKind.HELLINGER_MI:
        joint, product = jm, _independent_product(jm)
        return float(np.sum((np.sqrt(joint) - np.sqrt(product)) ** 2))

    whitened = whiten(jm).matrix
    if kind is BaselineKind.CHI2_MI:
        return float(np.sum(whitened ** 2))

    values = matcore.singular_values(whitened) if whitened.size else np.zeros(0)
    if kind is BaselineKind.MAX_CORRELATION:
        return float(values[0]) if values.size else 0.0

    if k is None:
        k = max(jm.shape[1] - 1, 1)
    if not 1 <= k <= min(jm.shape):
        raise ParameterError("k must be in 1..{}, got {}".format(min(jm.shape), k))
    top = np.concatenate([values, np.zeros(max(k - values.size, 0))])[:k]
    if kind is BaselineKind.TOPK_VOLUME:
        return float(np.prod(top))
    return float(np.sum(top))


__all__ = ['Estimator', 'ScoreReport', 'ExperimentMatrix', 'JointDistribution', 'expected_gram',
           'gram_score', 'plugin_gram', 'plugin_score', 'stratified_score',
           'repeated_stratified_score', 'stratified_expectation', 'score_report', 'rank_reports',
           'RankedReport', 'empirical_joint', 'whiten', 'Whitened', 'BaselineKind', 'BaselineSpec',
           'baseline_score']
