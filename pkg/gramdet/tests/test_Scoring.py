import math
from itertools import product

import numpy as np
from hypothesis import assume, given, settings, strategies as st

from gramdet.core import matcore
from gramdet.core.dataset import Labels, MatrixClass, MatrixClassKind, MisreportCounts, class_member, \
    misreport_matrix
from gramdet.core.exceptions import KernelDomainError, ParameterError, ShapeError
from gramdet.core.experiment import ExperimentMatrix
from gramdet.core.kernels import KernelSpec, ObservationSet
from gramdet.core.scoring import Estimator, ScoreReport, expected_gram, gram_score, plugin_gram, \
    plugin_score, rank_reports, repeated_stratified_score, score_report, stratified_expectation, \
    stratified_score
from gramdet.core.simulate import sample_observations
from gramdet.tests.GramDetTestCase import GramDetTestCase
from gramdet.tests.test_MatCore import cofactor_det

FOOTNOTE_P = np.array([[0.1, 0.1, 0.7], [0.9, 0.1, 0.2], [0, 0.8, 0.1]])


def two_label_example(p1, p2, delta):
    p = np.array([[1 - p1, 1 - p2], [p1, p2]])
    q = np.array([[(1 - delta) / 4, delta / 4], [delta / 4, (1 - delta) / 4]])
    return p, q


def separable_experiment(generator, d, extra_rows=2):
    """Random column-stochastic P whose top d x d block is 0.8 I plus noise.

    The smallest singular value stays above 0.8 - 0.2 sqrt(d + extra_rows),
    so det(P^T P) never needs filtering.
    """
    noise = generator.dirichlet(np.ones(d + extra_rows), size=d).T
    return 0.8 * np.eye(d + extra_rows, d) + 0.2 * noise


def random_experiment_and_report(seed, d, extra_rows=2):
    generator = np.random.default_rng(seed)
    p = separable_experiment(generator, d, extra_rows)
    q = generator.uniform(size=(d, d)) + d * np.eye(d)
    return p, q / q.sum(), generator


def near_truthful_counts(generator, row_counts, mismatches):
    """Joint counts with the given truth rows and that many off-diagonal records."""
    d = len(row_counts)
    counts = np.diag(row_counts).astype(np.int64)
    for _ in range(mismatches):
        x = generator.integers(d)
        z = (x + generator.integers(1, d)) % d
        counts[x, x] -= 1
        counts[x, z] += 1
    return MisreportCounts(counts)


class TestGramScore(GramDetTestCase):

    def test_two_label_closed_form(self):
        grid = (0.0, 0.25, 0.5, 0.75, 1.0)
        for p1, p2 in product(grid, grid):
            for delta in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
                p, q = two_label_example(p1, p2, delta)
                expected = (p1 - p2) ** 2 * (1 - 2 * delta) ** 2 / 2 ** 8
                self.assertLessEqual(abs(gram_score(p, q) - expected), 1e-12, (p1, p2, delta))

        p, q = two_label_example(1.0, 0.0, 0.0)
        self.assertAlmostEqual(gram_score(p, q), 1 / 256, places=15)

    def test_two_label_uniform_mixture_scores_zero(self):
        p, q = two_label_example(1.0, 0.0, 0.5)
        self.assertAlmostEqual(gram_score(p, q), 0.0, places=15)

    def test_footnote_experiment(self):
        q_x = np.diag([0.3, 0.3, 0.4])
        conditional = FOOTNOTE_P
        truthful = q_x
        reported = (conditional @ q_x).T

        truthful_score = gram_score(FOOTNOTE_P, truthful)
        reported_score = gram_score(FOOTNOTE_P, reported)

        for q, score in ((truthful, truthful_score), (reported, reported_score)):
            pq = FOOTNOTE_P @ q
            self.assertRelativelyClose(score, cofactor_det(pq.T @ pq), 1e-10)
        self.assertGreater(truthful_score, reported_score)
        self.assertRelativelyClose(truthful_score, 0.48 ** 2 * 0.036 ** 2, 1e-10)

    def test_label_gram_pair_entries(self):
        g = expected_gram(FOOTNOTE_P, np.eye(3))
        for x in range(3):
            for x2 in range(3):
                self.assertAlmostEqual(g[x, x2], sum(FOOTNOTE_P[y, x] * FOOTNOTE_P[y, x2]
                                                     for y in range(3)), places=15)

    def test_accepts_misreport_counts(self):
        truth = Labels([1, 1, 2, 2])
        counts = misreport_matrix(truth, truth)
        self.assertAlmostEqual(gram_score(np.eye(2), counts), 1 / 16, places=15)

    def test_dimension_mismatch(self):
        with self.assertRaises(ShapeError):
            gram_score(np.eye(2), np.eye(3) / 3)
        with self.assertRaises(ShapeError):
            gram_score([[0.5, 0.5], [0.4, 0.5]], np.eye(2) / 2)

    @settings(max_examples=1000, derandomize=True, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6))
    def test_multiplicative_in_experiment_and_report(self, seed, d):
        p, q, _ = random_experiment_and_report(seed, d)
        expected = matcore.det(p.T @ p) * matcore.det(q) ** 2
        self.assertRelativelyClose(gram_score(p, q), expected, 1e-9)

    @settings(max_examples=1000, derandomize=True, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6))
    def test_experiment_agnostic_order(self, seed, d):
        p, q, generator = random_experiment_and_report(seed, d)
        q2 = generator.uniform(size=(d, d)) + d * np.eye(d)
        q2 /= q2.sum()
        reference = matcore.det(q.T @ q) - matcore.det(q2.T @ q2)
        # ties are not ordered
        assume(abs(reference) > 1e-6 * max(matcore.det(q.T @ q), matcore.det(q2.T @ q2)))
        self.assertEqual(np.sign(gram_score(p, q) - gram_score(p, q2)), np.sign(reference))

    @settings(max_examples=1000, derandomize=True, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6))
    def test_truth_beats_non_permutation_reports(self, seed, d):
        generator = np.random.default_rng(seed)
        p = separable_experiment(generator, d)
        q_x = generator.dirichlet(np.ones(d) * 5)
        conditional = generator.dirichlet(np.ones(d), size=d).T
        assume(matcore.det(conditional) ** 2 < 1 - 1e-6)
        truthful = np.diag(q_x)
        reported = (conditional @ truthful).T
        self.assertGreater(gram_score(p, truthful), gram_score(p, reported))

    @settings(max_examples=1000, derandomize=True, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6))
    def test_garbling_lowers_score(self, seed, d):
        p, q, generator = random_experiment_and_report(seed, d)
        t = generator.dirichlet(np.ones(d), size=d).T
        assume(matcore.det(t) ** 2 < 1 - 1e-6)
        self.assertGreater(gram_score(p, q), gram_score(p, q @ t.T))

    @settings(max_examples=1000, derandomize=True, deadline=None)
    @given(st.sampled_from([1, 2]), st.sampled_from([2, 3]), st.integers(0, 2 ** 32 - 1))
    def test_approximate_hamming_order(self, balance, d, seed):
        generator = np.random.default_rng(seed)
        denominator = 64 * balance ** 2 * d ** 2
        delta = 1 / denominator
        # every truth row holds base or balance * base records
        base = 8 * denominator
        row_counts = base * generator.integers(1, balance + 1, size=d)
        # one below N / denominator keeps the fraction under delta after float rounding
        budget = int(row_counts.sum()) // denominator - 1
        worse_mismatches = int(generator.integers(1, budget + 1))
        better_mismatches = int(generator.integers(0, (worse_mismatches - 1) // (4 * balance) + 1))

        better = near_truthful_counts(generator, row_counts, better_mismatches)
        worse = near_truthful_counts(generator, row_counts, worse_mismatches)
        members = MatrixClass(MatrixClassKind.BALANCED_DELTA, balance, delta)
        self.assertTrue(class_member(better, members))
        self.assertTrue(class_member(worse, members))
        self.assertGreater(worse.mismatches, 4 * balance * better.mismatches)

        p = separable_experiment(generator, d)
        self.assertGreater(gram_score(p, better), gram_score(p, worse))


class TestPluginScore(GramDetTestCase):

    def test_two_records(self):
        report = self.labels([1, 2])
        obs = self.categorical([1, 2])
        self.assertMatrixAlmostEqual(plugin_gram(report, obs), np.diag([0.25, 0.25]))

        result = plugin_score(report, obs)
        self.assertAlmostEqual(result.value, 1 / 16, places=15)
        self.assertIs(result.estimator, Estimator.PLUGIN)
        self.assertEqual(result.n, 2)
        self.assertEqual(result.min_occurrence, 1)
        self.assertFalse(result.degenerate)
        self.assertIsNone(result.seed)

    def test_absent_label_is_degenerate(self):
        result = plugin_score(Labels([1, 1, 1], 2), self.categorical([1, 2, 1]))
        self.assertEqual(result.value, 0.0)
        self.assertTrue(result.degenerate)
        self.assertEqual(result.min_occurrence, 0)
        self.assertIsNone(result.to_dict()['diagnostics']['imbalance'])

    def test_exact_frequencies_reach_expected_gram(self):
        # 500 records per label, observation counts exactly 1000 * P Q
        truth = Labels([1] * 500 + [2] * 500)
        obs = self.categorical([1] * 450 + [2] * 50 + [1] * 100 + [2] * 400)
        p = np.array([[0.9, 0.2], [0.1, 0.8]])
        expected = gram_score(p, misreport_matrix(truth, truth))
        self.assertRelativelyClose(plugin_score(truth, obs).value, expected, 1e-12)

    def test_matches_sampled_expectation(self):
        p = np.array([[0.9, 0.2], [0.1, 0.8]])
        truth = Labels([1] * 500 + [2] * 500)
        expected = gram_score(p, misreport_matrix(truth, truth))
        experiment = ExperimentMatrix(p)
        values = np.array([plugin_score(truth, sample_observations(truth, experiment, seed)).value
                           for seed in range(300)])
        spread = values.std(ddof=1)
        self.assertLess(abs(values.mean() - expected), 3 * spread)

    def test_concentration_bound(self):
        experiment = ExperimentMatrix([[0.7, 0.1, 0.1], [0.2, 0.6, 0.2], [0.1, 0.3, 0.7]])
        truth = Labels(np.resize([1, 2, 3], 1000), 3)
        target = expected_gram(experiment, misreport_matrix(truth, truth))
        delta, n, trials = 0.1, len(truth), 500
        log_term = math.log(2 * truth.d / delta)
        bound = 4 * math.sqrt(log_term / n) + 2 * log_term / n
        failures = 0
        for seed in range(trials):
            g = plugin_gram(truth, sample_observations(truth, experiment, seed))
            if matcore.spectral_norm(g - target) > bound:
                failures += 1
        allowed = delta * trials + 3 * math.sqrt(trials * delta * (1 - delta))
        self.assertLessEqual(failures, allowed)

    def test_kernel_mismatch(self):
        with self.assertRaises(KernelDomainError):
            plugin_score(self.labels([1, 2]), self.categorical([1, 2]), KernelSpec('linear'))
        with self.assertRaises(KernelDomainError):
            plugin_score(self.labels([1, 2]), ObservationSet.embedding([[0.0], [1.0]]))
        with self.assertRaises(ShapeError):
            plugin_score(self.labels([1, 2]), self.categorical([1, 2, 1]))

    def test_rbf_bandwidth_is_resolved(self):
        obs = ObservationSet.embedding([[0.0], [0.0], [3.0], [3.0]])
        result = plugin_score(self.labels([1, 1, 2, 2]), obs, KernelSpec('rbf'))
        self.assertEqual(result.kernel.kind, 'rbf')
        self.assertIsNotNone(result.kernel.sigma)
        self.assertGreater(result.value, 0.0)

    @settings(max_examples=100, derandomize=True, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda d: st.tuples(
        st.just(d),
        st.lists(st.integers(1, d), min_size=1, max_size=40),
        st.integers(1, 5))).flatmap(lambda t: st.tuples(
            st.just(t[0]), st.just(t[1]),
            st.lists(st.integers(1, t[2]), min_size=len(t[1]), max_size=len(t[1])),
            st.just(t[2]))))
    def test_delta_matches_linear_on_one_hot(self, case):
        d, report, obs, k = case
        report = Labels(report, d)
        obs = ObservationSet.categorical(obs, k)
        delta = plugin_score(report, obs).value
        linear = plugin_score(report, obs.one_hot(), KernelSpec('linear')).value
        self.assertLessEqual(abs(delta - linear), 1e-12)


class TestStratifiedScore(GramDetTestCase):

    def test_single_occurrence_is_degenerate(self):
        result = stratified_score(self.labels([1, 1, 2]), self.categorical([1, 1, 2]), seed=7)
        self.assertEqual(result.value, 0.0)
        self.assertTrue(result.degenerate)
        self.assertEqual(result.min_occurrence, 1)
        self.assertEqual(result.seed, 7)

        absent = stratified_score(Labels([1, 1], 2), self.categorical([1, 1]), seed=1)
        self.assertEqual(absent.value, 0.0)
        self.assertTrue(absent.degenerate)

    def test_single_label(self):
        result = stratified_score(self.labels([1, 1, 1]), self.categorical([2, 2, 2]), seed=3)
        self.assertEqual(result.value, 1.0)
        self.assertFalse(result.degenerate)

    def test_identity_experiment(self):
        report = self.labels([1, 1, 2, 2])
        obs = self.categorical([1, 1, 2, 2])
        for seed in range(50):
            self.assertIn(stratified_score(report, obs, seed=seed).value, (0.0, 0.125))

        pair_matrix = (obs.values[:, None] == obs.values[None, :]).astype(float)
        self.assertAlmostEqual(stratified_expectation(report, pair_matrix), 1 / 16, places=15)

    def test_deterministic_per_seed(self):
        generator = np.random.default_rng(5)
        report = Labels(generator.integers(1, 4, size=60), 3)
        obs = ObservationSet.embedding(generator.standard_normal((60, 2)))
        first = stratified_score(report, obs, KernelSpec('rbf', 1.0), seed=11)
        second = stratified_score(report, obs, KernelSpec('rbf', 1.0), seed=11)
        self.assertEqual(first.value, second.value)
        self.assertEqual(first, second)

    def test_repetitions(self):
        report = self.labels([1, 1, 2, 2, 1, 2])
        obs = self.categorical([1, 2, 2, 2, 1, 1])
        single = repeated_stratified_score(report, obs, seed=4)
        self.assertIsNone(single.std_error)
        self.assertEqual(single.repetitions, 1)

        repeated = repeated_stratified_score(report, obs, seed=4, repetitions=8)
        self.assertEqual(repeated.repetitions, 8)
        self.assertEqual(repeated.seed, 4)
        self.assertIsNotNone(repeated.std_error)
        self.assertEqual(repeated, score_report(report, obs, estimator=Estimator.STRATIFIED,
                                                seed=4, repetitions=8))

        with self.assertRaises(ParameterError):
            repeated_stratified_score(report, obs, seed=4, repetitions=0)

    def test_report_needs_seed(self):
        with self.assertRaises(ParameterError):
            ScoreReport(0.0, Estimator.STRATIFIED, KernelSpec(), 3)

    @settings(max_examples=60, derandomize=True, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.sampled_from([(2, 2), (3, 2), (4, 4), (2, 3, 2), (3, 3, 2)]))
    def test_unbiased_at_truth(self, seed, sizes):
        d = len(sizes)
        generator = np.random.default_rng(seed)
        p = generator.dirichlet(np.ones(d + 1), size=d).T
        truth = Labels(np.repeat(np.arange(1, d + 1), sizes), d)
        g = p.T @ p
        pair_matrix = g[np.ix_(truth.zero_based, truth.zero_based)]
        expected = matcore.det(expected_gram(p, misreport_matrix(truth, truth)))
        self.assertLessEqual(abs(stratified_expectation(truth, pair_matrix) - expected), 1e-13)


class TestEstimatorSelection(GramDetTestCase):

    def test_parse(self):
        self.assertIs(Estimator.parse('plugin'), Estimator.PLUGIN)
        self.assertIs(Estimator.parse('plug-in'), Estimator.PLUGIN)
        self.assertIs(Estimator.parse('stratified'), Estimator.STRATIFIED)
        with self.assertRaises(ParameterError):
            Estimator.parse('bootstrap')

    def test_partial_knowledge_needs_experiment(self):
        with self.assertRaises(ParameterError):
            score_report(self.labels([1, 2]), self.categorical([1, 2]),
                         estimator=Estimator.PARTIAL_KNOWLEDGE)

    def test_to_dict(self):
        result = plugin_score(self.labels([1, 2, 1, 2]), self.categorical([1, 2, 1, 1]))
        data = result.to_dict()
        self.assertEqual(data['estimator'], 'plug-in')
        self.assertEqual(data['kernel'], 'delta')
        self.assertEqual(data['diagnostics']['min_occurrence'], 2)
        self.assertEqual(data['diagnostics']['imbalance'], 1.0)


class TestRanking(GramDetTestCase):

    def test_truth_ranks_first(self):
        truth = Labels([1, 2, 3] * 20)
        obs = self.categorical(truth.values)
        noisy = Labels(np.where(np.arange(60) % 5 == 0, 1, truth.values), 3)
        ranked = rank_reports([noisy, truth], obs, names=['noisy', 'truth'])
        self.assertEqual([r.name for r in ranked], ['truth', 'noisy'])
        self.assertEqual([r.index for r in ranked], [1, 0])
        self.assertGreater(ranked[0].report.value, ranked[1].report.value)

    def test_ties_keep_input_order(self):
        report = self.labels([1, 2, 1, 2])
        obs = self.categorical([1, 2, 2, 1])
        ranked = rank_reports([report, report, report], obs)
        self.assertEqual([r.name for r in ranked], ['report1', 'report2', 'report3'])

    def test_needs_two_reports(self):
        with self.assertRaises(ParameterError):
            rank_reports([self.labels([1, 2])], self.categorical([1, 2]))
