# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

from itertools import product
from unittest import TestCase

import numpy as np
import numpy.testing as npt

from pai_mlca.estimation.initialization import kmodes, class_order, reorder_classes, hierarchical_init, \
    hierarchical_start
from pai_mlca.estimation.em_step1 import EmControl
from pai_mlca.model.core import ModelParams, log_class_probabilities
from tests.fixtures import DataTestCase


def exhaustive_kmodes_cost(Y, K):
    best = None
    for assignment in product(range(K), repeat=len(Y)):
        assignment = np.array(assignment)
        if len(set(assignment)) < K:
            continue
        cost = 0
        for k in range(K):
            members = Y[assignment == k]
            ones = members.sum(axis=0)
            cost += np.minimum(ones, len(members) - ones).sum()
        best = cost if best is None else min(best, cost)
    return best


class KModesTestCase(TestCase):

    def setUp(self):
        self.Y = np.array([[1, 1, 1, 0],
                           [1, 1, 0, 0],
                           [1, 1, 1, 1],
                           [0, 0, 0, 1],
                           [0, 0, 1, 1],
                           [0, 0, 0, 0]])

    def test_optimal_partition_of_toy_rows(self):
        result = kmodes(self.Y, 2, seed=0, n_init=10)
        self.assertEqual(exhaustive_kmodes_cost(self.Y, 2), 4)
        self.assertEqual(result.cost, 4)
        self.assertEqual(len(set(result.assignment[:3])), 1)
        self.assertEqual(len(set(result.assignment[3:])), 1)
        self.assertNotEqual(result.assignment[0], result.assignment[3])

    def test_cost_never_increases(self):
        for seed in range(5):
            result = kmodes(self.Y, 3, seed=seed, n_init=1)
            self.assertTrue(np.all(np.diff(result.cost_trace) <= 0))
            self.assertEqual(result.n_iter, len(result.cost_trace))

    def test_deterministic(self):
        Y = np.random.default_rng(0).integers(0, 2, size=(200, 6))
        first, second = kmodes(Y, 3, seed=5), kmodes(Y, 3, seed=5)
        npt.assert_array_equal(first.assignment, second.assignment)
        npt.assert_array_equal(first.modes, second.modes)

    def test_more_clusters_than_patterns(self):
        with self.assertLogs("pai_mlca.estimation.initialization", level="WARNING"):
            result = kmodes(self.Y[:2], 3, seed=1)
        self.assertEqual(result.cost, 0)

    def test_invalid_k(self):
        self.assertRaises(ValueError, kmodes, self.Y, 0)


class ClassOrderTestCase(DataTestCase):

    def test_decreasing_means(self):
        order, tie = class_order(np.array([[0.2, 0.8, 0.5], [0.2, 0.8, 0.5]]))
        npt.assert_array_equal(order, [1, 2, 0])
        self.assertFalse(tie)

    def test_ties_keep_order(self):
        with self.assertLogs("pai_mlca.estimation.initialization", level="WARNING"):
            order, tie = class_order(np.array([[0.3, 0.5, 0.5]]))
        npt.assert_array_equal(order, [1, 2, 0])
        self.assertTrue(tie)

    def test_reorder_without_covariates(self):
        params = ModelParams.from_arrays([[0.2, 0.9], [0.1, 0.7]], [0.5, 0.5], pi=[[0.3, 0.7], [0.6, 0.4]])
        reordered = reorder_classes(params)
        npt.assert_allclose(reordered.phi, [[0.9, 0.2], [0.7, 0.1]])
        npt.assert_allclose(reordered.pi, [[0.7, 0.3], [0.4, 0.6]])
        self.assertIs(reorder_classes(reordered), reordered)

    def test_reorder_with_covariates(self):
        params = self.create_covariate_params()
        flipped = ModelParams.from_arrays(params.phi[:, ::-1], params.omega,
                                          gamma=np.zeros((2, 2, 2)) + [[[0.3, -0.1]], [[-0.2, 0.4]]])
        reordered = reorder_classes(flipped)
        npt.assert_allclose(reordered.phi, params.phi)

        Z = np.column_stack([np.ones(3), [-1., 0., 1.]])
        old = log_class_probabilities(flipped.structural, Z)
        new = log_class_probabilities(reordered.structural, Z)
        npt.assert_allclose(new, old[:, :, ::-1], atol=1e-12)


class HierarchicalInitTestCase(DataTestCase):

    def setUp(self):
        self.dataset, self.truth = self.create_simulated_dataset(J=20, n_low=50)
        self.dims = self.dataset.dims(3, 2)

    def test_canonical_start(self):
        params = hierarchical_init(self.dataset, self.dims, seed=3)
        self.assertEqual(params.phi.shape, (10, 3))
        self.assertEqual(params.pi.shape, (2, 3))
        self.assertTrue(np.all(np.diff(params.phi.mean(axis=0)) < 0))
        self.assertGreaterEqual(params.omega[0], params.omega[1])

    def test_deterministic(self):
        first = hierarchical_start(self.dataset, self.dims, seed=3)
        second = hierarchical_start(self.dataset, self.dims, seed=3)
        npt.assert_array_equal(first.params.phi, second.params.phi)
        npt.assert_array_equal(first.params.pi, second.params.pi)
        npt.assert_array_equal(first.high_kmodes.assignment, second.high_kmodes.assignment)
        self.assertEqual(first.single_level.params.M, 1)

    def test_single_level_fit_follows_control(self):
        details = hierarchical_start(self.dataset, self.dims, seed=3, ctrl=EmControl(max_iter=2, tol=1e-14, n_starts=4))
        self.assertEqual(details.single_level.n_iter, 2)
        self.assertFalse(details.single_level.converged)
        self.assertEqual(len(details.single_level.start_logliks), 1)

        default = hierarchical_start(self.dataset, self.dims, seed=3)
        self.assertGreater(default.single_level.n_iter, 2)
