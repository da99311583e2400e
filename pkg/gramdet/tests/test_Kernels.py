import math

import numpy as np
from hypothesis import given, settings, strategies as st

from gramdet.core import matcore
from gramdet.core.exceptions import KernelDomainError, ParameterError, ShapeError
from gramdet.core.kernels import KernelBase, KernelManager, KernelSpec, LabelGram, ObservationSet, \
    get_kernel, kernel_eval, kernel_matrix, label_gram, median_heuristic_sigma, resolve_spec
from gramdet.tests.GramDetTestCase import GramDetTestCase

FOOTNOTE_P = [[0.1, 0.1, 0.7], [0.9, 0.1, 0.2], [0, 0.8, 0.1]]


class TestKernelSpec(GramDetTestCase):

    def test_parse(self):
        self.assertEqual(KernelSpec.parse('delta'), KernelSpec('delta'))
        self.assertEqual(KernelSpec.parse('rbf:0.5'), KernelSpec('rbf', 0.5))
        self.assertEqual(KernelSpec.parse(' rbf '), KernelSpec('rbf'))
        self.assertEqual(str(KernelSpec('rbf', 2.0)), 'rbf:2')
        self.assertEqual(str(KernelSpec('pseudo-posterior')), 'pseudo-posterior')

    def test_bad_bandwidth(self):
        with self.assertRaises(ParameterError):
            KernelSpec.parse('rbf:wide')
        with self.assertRaises(ParameterError):
            KernelSpec('rbf', 0.0)
        with self.assertRaises(ParameterError):
            KernelSpec('rbf', -1.0)
        with self.assertRaises(ParameterError):
            KernelSpec('linear', 1.0)

    def test_unknown_kernel(self):
        with self.assertRaises(KernelDomainError):
            get_kernel(KernelSpec('cosine'))

    def test_registry(self):
        manager = KernelManager()
        self.assertEqual(sorted(manager.kernels), ['delta', 'linear', 'pseudo-posterior', 'rbf'])

        class ConstantKernel(KernelBase):
            def pairwise(self, a, b):
                return np.ones((len(a), len(b)))

        manager.register_kernel('constant', ConstantKernel)
        self.assertIsInstance(manager.get_kernel(KernelSpec('constant')), ConstantKernel)


class TestKernelEval(GramDetTestCase):

    def test_delta(self):
        spec = KernelSpec('delta')
        self.assertEqual(kernel_eval(spec, 3, 3), 1.0)
        self.assertEqual(kernel_eval(spec, 3, 4), 0.0)

    def test_rbf(self):
        self.assertAlmostEqual(kernel_eval(KernelSpec('rbf', 1.0), [0.0], [1.0]), math.exp(-1),
                               places=15)
        self.assertAlmostEqual(kernel_eval(KernelSpec('rbf', 2.0), [0.0, 0.0], [1.0, 1.0]),
                               math.exp(-0.5), places=15)
        self.assertEqual(kernel_eval(KernelSpec('rbf', 1.0), [1.5, -2.0], [1.5, -2.0]), 1.0)

    def test_linear(self):
        self.assertEqual(kernel_eval(KernelSpec('linear'), [1.0, 0.0], [0.0, 1.0]), 0.0)
        self.assertEqual(kernel_eval(KernelSpec('linear'), [1.0, 2.0], [3.0, 4.0]), 11.0)

    def test_pseudo_posterior(self):
        spec = KernelSpec('pseudo-posterior')
        self.assertAlmostEqual(kernel_eval(spec, [0.5, 0.5], [0.2, 0.8]), 0.5, places=15)
        with self.assertRaises(KernelDomainError):
            kernel_eval(spec, [0.5, 0.6], [0.2, 0.8])
        with self.assertRaises(KernelDomainError):
            kernel_eval(spec, [1.5, -0.5], [0.2, 0.8])

    def test_variant_mismatch(self):
        with self.assertRaises(KernelDomainError):
            kernel_eval(KernelSpec('delta'), [0.0], [0.0])
        with self.assertRaises(KernelDomainError):
            kernel_eval(KernelSpec('linear'), 1, 2)
        with self.assertRaises(KernelDomainError):
            kernel_eval(KernelSpec('linear'), 1, [2.0])
        with self.assertRaises(KernelDomainError):
            kernel_eval(KernelSpec('linear'), [1.0], [2.0, 3.0])

    def test_rbf_single_pair_needs_bandwidth(self):
        with self.assertRaises(ParameterError):
            kernel_eval(KernelSpec('rbf'), [0.0], [1.0])


class TestObservationSet(GramDetTestCase):

    def test_categorical(self):
        obs = ObservationSet.categorical([1, 3, 2], categories=('a', 'b', 'c'))
        self.assertTrue(obs.is_categorical)
        self.assertEqual(obs.k, 3)
        self.assertEqual(len(obs), 3)
        self.assertEqual(obs.categories, ('a', 'b', 'c'))
        self.assertMatrixAlmostEqual(obs.one_hot().values, [[1, 0, 0], [0, 0, 1], [0, 1, 0]])
        self.assertEqual(list(obs.take([2, 0]).values), [2, 1])

    def test_embedding(self):
        obs = ObservationSet.embedding([1.0, 2.0])
        self.assertFalse(obs.is_categorical)
        self.assertEqual(obs.k, 1)
        self.assertEqual(obs.values.shape, (2, 1))
        with self.assertRaises(ValueError):
            obs.values[0, 0] = 5.0
        with self.assertRaises(KernelDomainError):
            obs.one_hot()

    def test_invalid(self):
        with self.assertRaises(ShapeError):
            ObservationSet.categorical([0, 1])
        with self.assertRaises(ShapeError):
            ObservationSet.categorical([1, 4], k=3)
        with self.assertRaises(ShapeError):
            ObservationSet.embedding([[1.0, float('inf')]])
        with self.assertRaises(ShapeError):
            ObservationSet.embedding(np.zeros((0, 2)))


class TestLabelGram(GramDetTestCase):

    def test_identity_experiment(self):
        self.assertMatrixAlmostEqual(label_gram(np.eye(3)).g, np.eye(3))

    def test_dependent_columns(self):
        p = [[0.5, 0.5, 0.1], [0.5, 0.5, 0.9]]
        self.assertEqual(label_gram(p).det(), 0.0)

    def test_pair_entries(self):
        g = label_gram(FOOTNOTE_P).g
        p = np.asarray(FOOTNOTE_P)
        for x in range(3):
            for x2 in range(3):
                self.assertAlmostEqual(g[x, x2], float(np.dot(p[:, x], p[:, x2])), places=15)

    def test_kernel_matrix_forms(self):
        p = np.array([[0.6, 0.1], [0.4, 0.9]])
        kmat = [[1.0, 0.5], [0.5, 1.0]]
        expected = p.T @ np.asarray(kmat) @ p
        self.assertMatrixAlmostEqual(label_gram(p, KernelSpec('rbf', 1.0), kmat).g, expected)

        support = ObservationSet.embedding([[0.0], [1.0]])
        rbf = label_gram(p, KernelSpec('rbf', 1.0), support=support).g
        k01 = math.exp(-1)
        self.assertMatrixAlmostEqual(rbf, p.T @ np.array([[1, k01], [k01, 1]]) @ p, 1e-14)

    def test_errors(self):
        p = np.array([[0.6, 0.1], [0.4, 0.9]])
        with self.assertRaises(KernelDomainError):
            label_gram(p, KernelSpec('linear'))
        with self.assertRaises(ShapeError):
            label_gram(p, KernelSpec('delta'), np.eye(3))
        with self.assertRaises(ShapeError):
            label_gram(p, KernelSpec('linear'), support=ObservationSet.embedding([[1.0]]))
        with self.assertRaises(ShapeError):
            label_gram([[0.6, 0.1], [0.5, 0.9]])

    def test_symmetrized(self):
        gram = LabelGram([[1.0, 0.2], [0.2 + 1e-15, 1.0]])
        self.assertEqual(gram.g[0, 1], gram.g[1, 0])
        self.assertEqual(gram.d, 2)

    @settings(max_examples=100, derandomize=True, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5), st.integers(0, 3),
           st.sampled_from(['delta', 'rbf', 'pseudo-posterior']))
    def test_psd_and_positive_on_independent_experiments(self, seed, d, extra, kind):
        generator = np.random.default_rng(seed)
        rows = d + extra
        p = generator.dirichlet(np.ones(rows), size=d).T
        if kind == 'rbf':
            support = ObservationSet.embedding(generator.standard_normal((rows, 2)) * 3)
            g = label_gram(p, KernelSpec('rbf', 1.0), support=support).g
        elif kind == 'pseudo-posterior':
            support = ObservationSet.embedding(np.eye(rows))
            g = label_gram(p, KernelSpec('pseudo-posterior'), support=support).g
        else:
            g = label_gram(p).g

        self.assertMatrixAlmostEqual(g, g.T, 1e-12)
        self.assertGreaterEqual(np.linalg.eigvalsh(g).min(), -1e-9)
        if kind != 'rbf' and matcore.det(p.T @ p) > 1e-12:
            self.assertGreater(matcore.det(g), 0.0)


class TestBandwidth(GramDetTestCase):

    def test_median_heuristic(self):
        obs = ObservationSet.embedding([[0.0], [1.0], [3.0]])
        # distances 1, 2, 3
        self.assertEqual(median_heuristic_sigma(obs), 2.0)

    def test_constant_observations(self):
        obs = ObservationSet.embedding(np.ones((5, 2)))
        self.assertEqual(median_heuristic_sigma(obs), 1.0)

    def test_subsample_is_seeded(self):
        generator = np.random.default_rng(0)
        obs = ObservationSet.embedding(generator.standard_normal((600, 3)))
        first = median_heuristic_sigma(obs, sample_size=64, seed=9)
        self.assertEqual(first, median_heuristic_sigma(obs, sample_size=64, seed=9))
        self.assertGreater(first, 0.0)

    def test_resolve(self):
        obs = ObservationSet.embedding([[0.0], [1.0], [3.0]])
        self.assertEqual(resolve_spec(KernelSpec('rbf'), obs), KernelSpec('rbf', 2.0))
        self.assertEqual(resolve_spec(KernelSpec('rbf', 0.3), obs), KernelSpec('rbf', 0.3))
        self.assertEqual(resolve_spec(KernelSpec('delta'), obs), KernelSpec('delta'))

    def test_categorical_has_no_bandwidth(self):
        with self.assertRaises(KernelDomainError):
            median_heuristic_sigma(self.categorical([1, 2]))


class TestReportGram(GramDetTestCase):

    def test_blocked_sum_matches_dense(self):
        generator = np.random.default_rng(3)
        values = generator.standard_normal((40, 2))
        obs = ObservationSet.embedding(values)
        onehot = np.eye(3)[generator.integers(0, 3, size=40)]
        spec = KernelSpec('rbf', 1.5)
        dense = kernel_matrix(spec, obs, obs)
        blocked = get_kernel(spec).report_gram(obs, onehot)
        self.assertMatrixAlmostEqual(blocked, onehot.T @ dense @ onehot, 1e-10)
        self.assertMatrixAlmostEqual(get_kernel(spec).report_gram(obs, onehot, dense),
                                     onehot.T @ dense @ onehot, 1e-10)

    def test_linear_fast_path(self):
        values = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
        obs = ObservationSet.embedding(values)
        onehot = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        spec = KernelSpec('linear')
        dense = kernel_matrix(spec, obs, obs)
        self.assertMatrixAlmostEqual(get_kernel(spec).report_gram(obs, onehot),
                                     onehot.T @ dense @ onehot)
