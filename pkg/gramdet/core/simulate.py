"""Synthetic experiments: random experiments, observation sampling, label
corruption, trial batches and ranking agreement.

A batch fixes one ground truth (x, y) and then, for every policy and trial,
corrupts the truth at each level with the same trial seed, so a report at a
higher level corrupts a superset of the records corrupted at a lower one.
Trials may run on worker processes; results are merged in trial order and
depend only on the master seed.
"""
import logging
import multiprocessing
from dataclasses import dataclass, field, asdict
from typing import Tuple

import numpy as np
import psutil
from scipy import stats

from gramdet.core import kernels, policy as policies, seeds
from gramdet.core.config_loader import default_seed, string_to_list
from gramdet.core.dataset import Labels, hamming_distance
from gramdet.core.exceptions import ConfigFileError, ParameterError, ShapeError
from gramdet.core.experiment import ExperimentMatrix
from gramdet.core.kernels import KernelBase, KernelSpec, ObservationSet, get_kernel, kernel_matrix, \
    resolve_spec
from gramdet.core.policy import MixedParams, PolicySpec, get_policy
from gramdet.core.scoring import Estimator, baseline_score, empirical_joint, \
    plugin_score, stratified_score

OBSERVATION_MODES = ('categorical', 'gaussian')
KERNEL_MATRIX_LIMIT = 5000

log = logging.getLogger('TrialRunner')


def random_experiment(d, k, seed):
    """k x d experiment with i.i.d. uniform entries, columns normalized."""
    if d < 1 or k < 1:
        raise ParameterError("Need d >= 1 and k >= 1")
    weights = seeds.rng(seed).uniform(size=(k, d))
    return ExperimentMatrix(weights / weights.sum(axis=0, keepdims=True))


def sample_observations(truth, experiment, seed):
    """Categorical y_n drawn from column x_n of the experiment."""
    if truth.d > experiment.d:
        raise ShapeError("Truth uses {} labels, experiment has {}".format(truth.d, experiment.d))
    cdf = np.cumsum(experiment.p, axis=0)[:, truth.zero_based]
    u = seeds.rng(seed).random(len(truth))
    ids = np.minimum((cdf <= u[None, :]).sum(axis=0) + 1, experiment.k)
    return ObservationSet.categorical(ids, experiment.k)


def gaussian_observations(truth, means, sigma, seed):
    """y_n = means[x_n] + sigma * standard normal noise."""
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    means = np.asarray(means, dtype=float)
    if means.ndim != 2 or means.shape[0] < truth.d:
        raise ShapeError("Need one mean row per label")
    noise = seeds.rng(seed).standard_normal((len(truth), means.shape[1]))
    return ObservationSet.embedding(means[truth.zero_based] + sigma * noise)


def separated_means(d, m, scale, seed):
    """Class means at +/- scale * e_i when d <= 2m, Gaussian draws otherwise.

    The signed basis layout keeps every pair of means at least
    sqrt(2) * scale apart.
    """
    if d <= 2 * m:
        basis = np.vstack([np.eye(m), -np.eye(m)])
        return scale * basis[:d]
    return scale * seeds.rng(seed).standard_normal((d, m))


def corrupt(truth, p, policy, experiment=None, seed=0):
    """Keep each record with probability 1 - p, else replace it by the policy's Z."""
    if not 0 <= p <= 1:
        raise ParameterError("Corruption level must be in [0, 1], got {}".format(p))
    if isinstance(policy, str):
        policy = PolicySpec(policy)
    impl = get_policy(policy)
    impl.check(truth.d, experiment)
    generator = seeds.rng(seed)
    corrupted = generator.random(len(truth)) < p
    z = impl.replacement(truth.values, truth.d, generator, experiment)
    return Labels(np.where(corrupted, z, truth.values), truth.d)


def mixed_policy_matrix(d, params=MixedParams(), generator=None):
    """The mixed policy's row-stochastic matrix pi."""
    # pylint: disable-msg=import-outside-toplevel
    from gramdet.policies.mixed import mixed_policy_matrix as draw
    return draw(d, params, generator if generator is not None else seeds.rng(0))


def l2_error(truth, report):
    """Euclidean distance between label ids read as reals."""
    return float(np.linalg.norm(truth.values.astype(float) - report.values))


@dataclass(frozen=True)
class TrialConfig:

    """Everything one simulation batch needs."""

    d: int = 5
    k: int = 5
    n: int = 2000
    levels: Tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    policies: Tuple[PolicySpec, ...] = (PolicySpec('uniform'), )
    trials: int = 20
    estimator: Estimator = Estimator.PLUGIN
    kernel: KernelSpec = KernelSpec()
    seed: int = 0
    observations: str = 'categorical'
    mean_scale: float = 3.0
    noise_sigma: float = 1.0
    workers: int = 1

    def __post_init__(self):
        checks = (('d', self.d >= 1, "must be >= 1"),
                  ('k', self.k >= 1, "must be >= 1"),
                  ('n', self.n >= 1, "must be >= 1"),
                  ('trials', self.trials >= 1, "must be >= 1"),
                  ('levels', len(self.levels) >= 1 and all(0 <= p <= 1 for p in self.levels),
                   "must be a nonempty list of probabilities"),
                  ('policies', len(self.policies) >= 1, "must name at least one policy"),
                  ('observations', self.observations in OBSERVATION_MODES,
                   "must be one of {}".format(', '.join(OBSERVATION_MODES))),
                  ('noise_sigma', self.noise_sigma > 0, "must be positive"),
                  ('workers', self.workers >= 0, "must be >= 0"))
        for name, ok, message in checks:
            if not ok:
                raise ConfigFileError("{} (got {!r})".format(message, getattr(self, name)),
                                      'simulation.{}'.format(name))
        if self.estimator is Estimator.PARTIAL_KNOWLEDGE:
            raise ConfigFileError("must be plugin or stratified", 'simulation.estimator')
        for policy in self.policies:
            try:
                get_policy(policy).check(self.d, True)
            except ParameterError as e:
                raise ConfigFileError(str(e), 'simulation.policies')

    @classmethod
    def from_config(cls, config, **overrides):
        """Build from the simulation and mixed_policy config sections."""
        section = dict(config['simulation'])
        section.update({k: v for k, v in overrides.items() if v is not None})
        mixed = MixedParams.from_config(config.get('mixed_policy', {}))
        try:
            levels = tuple(float(p) for p in string_to_list(section['levels']))
        except (TypeError, ValueError):
            raise ConfigFileError("must be a list of numbers", 'simulation.levels')
        try:
            kernel = section['kernel']
            kernel = kernel if isinstance(kernel, KernelSpec) else KernelSpec.parse(kernel)
            estimator = section['estimator']
            estimator = estimator if isinstance(estimator, Estimator) else Estimator.parse(estimator)
        except ParameterError as e:
            raise ConfigFileError(str(e), 'simulation.kernel/estimator')
        seed = section.get('seed')
        return cls(d=int(section['d']), k=int(section['k']), n=int(section['n']), levels=levels,
                   policies=tuple(PolicySpec(name, mixed) for name in string_to_list(section['policies'])),
                   trials=int(section['trials']), estimator=estimator, kernel=kernel,
                   seed=int(seed) if seed is not None else default_seed(config),
                   observations=section['observations'], mean_scale=float(section['mean_scale']),
                   noise_sigma=float(section['noise_sigma']), workers=int(section['workers']))

    def to_dict(self):
        return {'d': self.d, 'k': self.k, 'n': self.n, 'levels': list(self.levels),
                'policies': [str(p) for p in self.policies], 'trials': self.trials,
                'estimator': self.estimator.value, 'kernel': str(self.kernel), 'seed': self.seed,
                'observations': self.observations, 'mean_scale': self.mean_scale,
                'noise_sigma': self.noise_sigma,
                'mixed_policy': asdict(self.policies[0].mixed)}


@dataclass(frozen=True)
class TrialRecord:
    policy: str
    p: float
    trial: int
    score: float
    hamming: int
    l2: float
    baselines: dict = field(default_factory=dict)


def summarize(values):
    """Mean, standard error of the mean, and a 95% normal interval."""
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    if values.size < 2:
        return {'mean': mean, 'std_error': None, 'ci95': None}
    se = float(stats.sem(values))
    return {'mean': mean, 'std_error': se, 'ci95': [mean - 1.96 * se, mean + 1.96 * se]}


@dataclass(frozen=True)
class CellSummary:
    policy: str
    p: float
    count: int
    score: dict
    hamming: dict
    l2: dict


class TrialResult:

    """Per-trial records plus per (policy, level) summaries."""

    def __init__(self, config, records):
        self.config = config
        self.records = list(records)
        self.cells = []
        for policy in config.policies:
            for p in config.levels:
                rows = [r for r in self.records if r.policy == str(policy) and r.p == p]
                self.cells.append(CellSummary(
                    str(policy), p, len(rows),
                    summarize([r.score for r in rows]),
                    summarize([r.hamming for r in rows]),
                    summarize([r.l2 for r in rows])))

    def cell(self, policy, p):
        for c in self.cells:
            if c.policy == str(policy) and c.p == p:
                return c
        raise KeyError((policy, p))

    def mean_scores(self, policy):
        """Mean score per level, in level order."""
        return [self.cell(policy, p).score['mean'] for p in self.config.levels]

    def to_dict(self):
        return {'config': self.config.to_dict(),
                'cells': [asdict(c) for c in self.cells],
                'records': [asdict(r) for r in self.records]}


class GroundTruth:

    """The fixed (x, y) of a batch, with the experiment when one exists."""

    def __init__(self, truth, observations, experiment=None, kernel=None, kernel_values=None):
        self.truth = truth
        self.observations = observations
        self.experiment = experiment
        self.kernel = kernel
        self.kernel_values = kernel_values

    @classmethod
    def generate(cls, config, master_seed=None, n=None):
        master = config.seed if master_seed is None else master_seed
        n = config.n if n is None else n
        truth = Labels(seeds.rng(seeds.derive_seed(master, seeds.STREAM_TRUTH)).integers(
            1, config.d + 1, size=n), config.d)
        obs_seed = seeds.derive_seed(master, seeds.STREAM_OBSERVATIONS)
        experiment = None
        if config.observations == 'categorical':
            experiment = random_experiment(config.d, config.k,
                                           seeds.derive_seed(master, seeds.STREAM_EXPERIMENT))
            obs = sample_observations(truth, experiment, obs_seed)
        else:
            means = separated_means(config.d, config.k, config.mean_scale,
                                    seeds.derive_seed(master, seeds.STREAM_EXPERIMENT))
            obs = gaussian_observations(truth, means, config.noise_sigma, obs_seed)

        kernel = resolve_spec(config.kernel, obs)
        values = None
        impl = get_kernel(kernel)
        impl.check(obs)
        # kernels without a finite feature map reuse one N x N kernel matrix
        if type(impl).report_gram is KernelBase.report_gram and n <= KERNEL_MATRIX_LIMIT:
            values = kernel_matrix(kernel, obs, obs)
        return cls(truth, obs, experiment, kernel, values)


def _score(config, ground, report, seed):
    if config.estimator is Estimator.STRATIFIED:
        return stratified_score(report, ground.observations, ground.kernel, seed).value
    return plugin_score(report, ground.observations, ground.kernel, ground.kernel_values).value


def run_trial(config, ground, policy_index, trial, baselines=()):
    """All levels of one (policy, trial) pair."""
    policy = config.policies[policy_index]
    trial_seed = seeds.derive_seed(config.seed, seeds.STREAM_TRIAL, policy_index, trial)
    records = []
    for level_index, p in enumerate(config.levels):
        report = corrupt(ground.truth, p, policy, ground.experiment, trial_seed)
        score = _score(config, ground, report,
                       seeds.derive_seed(trial_seed, seeds.STREAM_ESTIMATOR, level_index))
        extra = {}
        if baselines:
            joint = empirical_joint(report, ground.observations)
            extra = {str(b): baseline_score(joint, b) for b in baselines}
        records.append(TrialRecord(str(policy), p, trial, score,
                                   hamming_distance(ground.truth, report),
                                   l2_error(ground.truth, report), extra))
    return records


_worker_context = None


def _init_worker(context):
    global _worker_context      # pylint: disable-msg=global-statement
    _worker_context = context


def _run_task(task):
    config, ground, baselines = _worker_context
    return run_trial(config, ground, task[0], task[1], baselines)


def resolve_workers(workers):
    """0 means one worker per physical core."""
    if workers == 0:
        return psutil.cpu_count(logical=False) or 1
    return workers


def _init_process(kernel_modules, policy_modules, initializer, initargs):
    # spawned workers start with the default registries
    kernels.configure_kernels(kernel_modules)
    policies.configure_policies(policy_modules)
    if initializer is not None:
        initializer(*initargs)


def map_ordered(func, tasks, workers, initializer=None, initargs=()):
    """Map over tasks, in order, on up to `workers` spawned processes."""
    workers = resolve_workers(workers)
    if workers <= 1 or len(tasks) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [func(t) for t in tasks]
    ctx = multiprocessing.get_context('spawn')
    registries = (kernels.default_manager().modules, policies.default_manager().modules)
    with ctx.Pool(min(workers, len(tasks)), _init_process, registries + (initializer, initargs)) as pool:
        return pool.map(func, tasks)


class TrialRunner:

    """Runs a batch of trials and collects a TrialResult."""

    def __init__(self, config, baselines=(), workers=None):
        self.log = logging.getLogger('TrialRunner')
        self.config = config
        self.baselines = tuple(baselines)
        self.workers = config.workers if workers is None else workers
        if self.baselines and config.observations != 'categorical':
            raise ParameterError("Baseline scores need categorical observations")

    def run(self):
        config = self.config
        ground = GroundTruth.generate(config)
        self.log.info("Ground truth: N=%s d=%s observations=%s kernel=%s",
                      config.n, config.d, config.observations, ground.kernel)
        tasks = [(i, t) for i in range(len(config.policies)) for t in range(config.trials)]
        chunks = map_ordered(_run_task, tasks, self.workers, _init_worker,
                             ((config, ground, self.baselines), ))
        records = [r for chunk in chunks for r in chunk]
        self.log.info("Finished %s trials over %s levels", len(tasks), len(config.levels))
        return TrialResult(config, records)


def run_trials(config, workers=None):
    """Run every (policy, level, trial) cell of a batch."""
    return TrialRunner(config, workers=workers).run()


def ranking_agreement(scores, reference):
    """True when scores in decreasing order rank the levels as reference does increasing.

    Any tie in either sequence counts as disagreement.
    """
    scores = np.asarray(scores, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if scores.shape != reference.shape:
        raise ShapeError("Scores and reference differ in length")
    if scores.size < 2:
        raise ShapeError("Need at least two levels to compare rankings")
    if np.unique(scores).size < scores.size or np.unique(reference).size < reference.size:
        return False
    return bool(np.array_equal(np.argsort(-scores), np.argsort(reference)))


def _run_study_dataset(task):
    config, n, index = task
    master = seeds.derive_seed(config.seed, seeds.STREAM_DATASET, n, index)
    ground = GroundTruth.generate(config, master, n)
    trial_seed = seeds.derive_seed(master, seeds.STREAM_TRIAL)
    scores, hammings, l2s = [], [], []
    for level_index, p in enumerate(config.levels):
        report = corrupt(ground.truth, p, config.policies[0], ground.experiment, trial_seed)
        scores.append(_score(config, ground, report,
                             seeds.derive_seed(trial_seed, seeds.STREAM_ESTIMATOR, level_index)))
        hammings.append(hamming_distance(ground.truth, report))
        l2s.append(l2_error(ground.truth, report))
    return {'p': ranking_agreement(scores, config.levels),
            'hamming': ranking_agreement(scores, hammings),
            'l2': ranking_agreement(scores, l2s)}


def ranking_study(config, sizes, datasets, workers=None):
    """Fraction of fresh datasets whose score ranking matches p, Hamming and l2 rankings.

    Returns {n: {'datasets': count, 'p': fraction, 'hamming': fraction, 'l2': fraction}}.
    """
    workers = config.workers if workers is None else workers
    out = dict()
    for n in sizes:
        matches = map_ordered(_run_study_dataset, [(config, n, i) for i in range(datasets)], workers)
        out[n] = {'datasets': datasets}
        for reference in ('p', 'hamming', 'l2'):
            out[n][reference] = sum(m[reference] for m in matches) / datasets
        log.info("N=%s matched rankings: %s", n, out[n])
    return out


def score_error_correlation(result):
    """Spearman correlation of score against Hamming error over all records."""
    scores = [r.score for r in result.records]
    errors = [r.hamming for r in result.records]
    return float(stats.spearmanr(scores, errors)[0])


__all__ = ['random_experiment', 'sample_observations', 'gaussian_observations', 'separated_means',
           'corrupt', 'mixed_policy_matrix', 'TrialConfig', 'TrialRecord', 'CellSummary',
           'TrialResult', 'TrialRunner', 'GroundTruth', 'run_trials', 'ranking_agreement',
           'ranking_study', 'score_error_correlation']
