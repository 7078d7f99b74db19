# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

import numpy as np
import numpy.testing as npt

from pai_mlca.estimation.variance import score_contributions, opg, inverse_information, corrected_covariance, \
    naive_covariance, full_information_covariance, ScoreBlocks
from pai_mlca.model.core import ModelParams, structural_vector, structural_from_vector, measurement_vector, \
    measurement_from_vector
from pai_mlca.model.posterior import e_step, UNCONDITIONAL, CONDITIONAL
from pai_mlca.utilities.exceptions import NumericalError
from tests.fixtures import DataTestCase


def numerical_gradient(function, x, h=1e-5):
    gradient = np.empty_like(x)
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = h
        gradient[i] = (function(x + step) - function(x - step)) / (2 * h)
    return gradient


class ScoreTestCase(DataTestCase):

    def check_scores(self, dataset, params, mode):
        M, T, K, H = params.M, params.T, params.K, params.H
        p2 = M - 1 + M * (T - 1) * K

        def total_loglik(x):
            candidate = ModelParams(measurement_from_vector(x[p2:], H, T), structural_from_vector(x[:p2], M, T, K))
            return e_step(dataset, candidate, mode).loglik

        x = np.concatenate([structural_vector(params.structural), measurement_vector(params.measurement)])
        scores = score_contributions(dataset, params, e_step(dataset, params, mode), mode)
        npt.assert_allclose(scores.stacked.sum(axis=0), numerical_gradient(total_loglik, x), rtol=1e-6, atol=1e-6)

    def test_unconditional_scores_are_gradients(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            T, M = rng.integers(2, 4), rng.integers(1, 4)
            dataset, params = self.create_random_instance(rng, J=4, max_n=5, H=3, T=T, M=M, K=1)
            self.check_scores(dataset, params, UNCONDITIONAL)

    def test_conditional_scores_are_gradients(self):
        rng = np.random.default_rng(32)
        for _ in range(25):
            T, M = rng.integers(2, 4), rng.integers(1, 4)
            dataset, params = self.create_random_instance(rng, J=4, max_n=5, H=3, T=T, M=M, K=2)
            self.check_scores(dataset, params, CONDITIONAL)

    def test_alpha_score_is_shared_within_groups(self):
        dataset, params = self.create_random_instance(np.random.default_rng(4), J=3, max_n=4, T=2, M=2)
        post = e_step(dataset, params)
        scores = score_contributions(dataset, params, post, UNCONDITIONAL)
        group_sums = np.add.reduceat(scores.alpha, dataset.offsets, axis=0)
        npt.assert_allclose(group_sums[:, 0], post.u[:, 1] - params.omega[1])
        self.assertEqual(scores.theta2.shape, (dataset.N, 1 + 2))


class CovarianceTestCase(DataTestCase):

    def setUp(self):
        rng = np.random.default_rng(8)
        N = 400
        self.s1 = ScoreBlocks(alpha=rng.normal(size=(N, 1)), gamma=rng.normal(size=(N, 2)),
                              beta=rng.normal(size=(N, 3)))
        mixing = rng.normal(size=(3, 3))
        self.s2 = ScoreBlocks(alpha=rng.normal(size=(N, 1)), gamma=rng.normal(size=(N, 2)) + self.s1.beta[:, :2],
                              beta=self.s1.beta.dot(mixing))

    def test_opg(self):
        scores = np.array([[1., 0.], [0., 2.]])
        npt.assert_allclose(opg(scores), [[0.5, 0.], [0., 2.]])

    def test_corrected_dominates_naive(self):
        estimate = corrected_covariance(self.s1, self.s2)
        self.assertEqual(estimate.V.shape, (3, 3))
        npt.assert_allclose(estimate.V, estimate.V.T)
        self.assertGreaterEqual(np.linalg.eigvalsh(estimate.V - estimate.V2).min(), -1e-10)
        self.assertTrue(np.all(estimate.standard_errors >= estimate.naive_standard_errors - 1e-12))
        npt.assert_allclose(estimate.covariance, estimate.V / 400)

        naive = naive_covariance(self.s2)
        npt.assert_allclose(naive.V, estimate.V2)
        npt.assert_array_equal(naive.V1, 0.)

    def test_full_information_is_structural_block(self):
        estimate = full_information_covariance(self.s1)
        full = np.linalg.inv(opg(self.s1.stacked))
        npt.assert_allclose(estimate.V, full[:3, :3], rtol=1e-8)

    def test_inverse_information(self):
        npt.assert_allclose(inverse_information(np.diag([2., 4.])), np.diag([0.5, 0.25]))
        with self.assertLogs("pai_mlca.estimation.variance", level="WARNING"):
            inverse_information(np.zeros((2, 2)))
        self.assertRaises(NumericalError, inverse_information, np.diag([1., -1.]))
        self.assertEqual(inverse_information(np.zeros((0, 0))).shape, (0, 0))
