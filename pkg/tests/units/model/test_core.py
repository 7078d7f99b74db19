# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

from unittest import TestCase

import numpy as np
import numpy.testing as npt

from pai_mlca import defaults
from pai_mlca.model.core import Dataset, ModelDims, ModelParams, MeasurementParams, StructuralParams, \
    to_loglinear, from_loglinear, check_identifiability, log_class_probabilities, relabel_params, \
    structural_vector, structural_from_vector, measurement_vector, measurement_from_vector, numerical_rank
from tests.fixtures import DataTestCase


class ModelDimsTestCase(TestCase):

    def test_parameter_counts(self):
        dims = ModelDims(J=2, n=[3, 4], H=10, T=3, M=2)
        self.assertEqual(dims.N, 7)
        self.assertEqual(dims.npar_unconditional, 1 + 2 * 2 + 30)
        self.assertEqual(dims.with_classes(K=2).n_structural, 1 + 2 * 2 * 2)
        self.assertEqual(dims.with_classes(K=2).npar_conditional, 9 + 30)

    def test_invalid_dims(self):
        self.assertRaises(ValueError, ModelDims, 0, [], 3, 2, 1)
        self.assertRaises(ValueError, ModelDims, 2, [3], 3, 2, 1)
        self.assertRaises(ValueError, ModelDims, 2, [3, 0], 3, 2, 1)
        self.assertRaises(ValueError, ModelDims, 2, [3, 3], 3, 0, 1)


class DatasetTestCase(TestCase):

    def test_rows_are_sorted_by_group(self):
        data = Dataset([[1, 0], [0, 0], [1, 1]], ["b", "a", "b"])
        self.assertEqual(list(data.group_labels), ["a", "b"])
        npt.assert_array_equal(data.sizes, [1, 2])
        npt.assert_array_equal(data.offsets, [0, 1])
        npt.assert_array_equal(data.permutation, [1, 0, 2])
        npt.assert_array_equal(data.Y, [[0, 0], [1, 0], [1, 1]])
        npt.assert_array_equal(data.group_index, [0, 1, 1])
        self.assertEqual(data.covariate_names, ["intercept"])
        self.assertEqual(data.item_names, ["y1", "y2"])

    def test_non_binary_response_names_row_and_column(self):
        with self.assertRaises(ValueError) as context:
            Dataset([[1, 0], [0, 2]], [1, 1])
        self.assertIn("row 1 column 1", str(context.exception))

    def test_missing_response(self):
        self.assertRaises(ValueError, Dataset, [[1, np.nan]], [1])

    def test_design_needs_intercept(self):
        self.assertRaises(ValueError, Dataset, [[1], [0]], [1, 1], Z=[[2., 1.], [1., 0.]])
        self.assertRaises(ValueError, Dataset, [[1], [0]], [1, 1], Z=[[1.], [1.], [1.]])

    def test_arrays_are_read_only(self):
        data = Dataset([[1, 0]], [1])
        with self.assertRaises(ValueError):
            data.Y[0, 0] = 0

    def test_rank_deficient_design(self):
        Z = np.column_stack([np.ones(4), [1., 2., 3., 4.], [2., 4., 6., 8.]])
        data = Dataset(np.zeros((4, 2)), [1, 1, 2, 2], Z)
        self.assertFalse(data.has_full_rank_design())
        self.assertEqual(numerical_rank(Z), 2)
        self.assertEqual(data.dims(2, 1), ModelDims(2, [2, 2], 2, 2, 1, 3))


class ParamsTestCase(DataTestCase):

    def test_measurement_is_clamped(self):
        phi = MeasurementParams([[0., 1.], [0.5, 0.5]]).phi
        self.assertEqual(phi[0, 0], defaults.EPSILON)
        self.assertEqual(phi[0, 1], 1 - defaults.EPSILON)
        self.assertRaises(ValueError, MeasurementParams, [[1.5, 0.2]])

    def test_structural_views(self):
        structural = StructuralParams([0.5, 0.5], pi=[[0.5, 0.25, 0.25], [0.2, 0.2, 0.6]])
        npt.assert_allclose(structural.gamma[:, :, 0], [[np.log(0.5), np.log(0.5)], [0., np.log(3.)]])

        from_gamma = StructuralParams([0.5, 0.5], gamma=structural.gamma)
        npt.assert_allclose(from_gamma.pi, structural.pi)
        self.assertEqual(from_gamma.K, 1)

    def test_structural_validation(self):
        self.assertRaises(ValueError, StructuralParams, [0.5, 0.6], pi=[[1.], [1.]])
        self.assertRaises(ValueError, StructuralParams, [0.5, 0.5])
        self.assertRaises(ValueError, StructuralParams, [1.], gamma=np.zeros((2, 1, 1)))

    def test_class_mismatch(self):
        self.assertRaises(ValueError, ModelParams.from_arrays, [[0.5, 0.5]], [1.], pi=[[0.2, 0.3, 0.5]])

    def test_loglinear_round_trip(self):
        params = self.create_toy_params()
        ll = to_loglinear(params)
        self.assertFalse(ll.clamped)
        npt.assert_allclose(ll.alpha, [np.log(0.4 / 0.6)])
        self.assertEqual(ll.gamma.shape, (1, 2))

        back = from_loglinear(ll)
        npt.assert_allclose(back.phi, params.phi, atol=1e-12)
        npt.assert_allclose(back.omega, params.omega, atol=1e-12)
        npt.assert_allclose(back.pi, params.pi, atol=1e-12)

    def test_loglinear_boundary_warns(self):
        params = ModelParams.from_arrays([[1., 0.2]], [1.], pi=[[0.5, 0.5]])
        with self.assertLogs("pai_mlca.model.core", level="WARNING"):
            ll = to_loglinear(params)
        self.assertTrue(ll.clamped)
        self.assertTrue(np.all(np.isfinite(ll.beta)))

    def test_vectors(self):
        params = self.create_covariate_params()
        theta = structural_vector(params.structural)
        self.assertEqual(len(theta), 1 + 2 * 2 * 2)
        back = structural_from_vector(theta, 2, 3, 2)
        npt.assert_allclose(back.gamma, params.gamma)
        npt.assert_allclose(back.omega, params.omega)
        self.assertRaises(ValueError, structural_from_vector, theta[1:], 2, 3, 2)

        beta = measurement_vector(params.measurement)
        self.assertAlmostEqual(beta[1], np.log(0.8 / 0.2))
        npt.assert_allclose(measurement_from_vector(beta, 4, 3).phi, params.phi)


class IdentifiabilityTestCase(DataTestCase):

    def test_conditions(self):
        params = self.create_toy_params()
        self.assertTrue(check_identifiability(ModelDims(2, [3, 3], 3, 2, 2), params).ok)

        report = check_identifiability(ModelDims(2, [3, 2], 3, 2, 2), params)
        self.assertFalse(report.min_group_size)
        self.assertEqual(report.violations, ["some group has fewer than 3 units"])

        equal_items = ModelParams.from_arrays([[0.5, 0.5], [0.8, 0.1]], [0.6, 0.4], pi=[[0.7, 0.3], [0.2, 0.8]])
        self.assertFalse(check_identifiability(ModelDims(1, [3], 2, 2, 2), equal_items).distinct_items)

        more_high_classes = ModelParams.from_arrays([[0.9], [0.1]], [0.5, 0.5], pi=[[1.], [1.]])
        report = check_identifiability(ModelDims(1, [3], 2, 1, 2), more_high_classes)
        self.assertFalse(report.m_le_t)
        self.assertFalse(report.pi_full_rank)

        Z = np.column_stack([np.ones(3), np.ones(3)])
        self.assertFalse(check_identifiability(ModelDims(1, [3], 3, 2, 2), params, Z).z_full_rank)
        self.assertIsNone(check_identifiability(ModelDims(1, [3], 3, 2, 2), params).z_full_rank)


class ClassProbabilitiesTestCase(DataTestCase):

    def test_rows_sum_to_one(self):
        params = self.create_covariate_params()
        Z = np.column_stack([np.ones(5), np.linspace(-2, 2, 5)])
        log_pi = log_class_probabilities(params.structural, Z)
        self.assertEqual(log_pi.shape, (5, 2, 3))
        npt.assert_allclose(np.exp(log_pi).sum(axis=2), 1.)
        self.assertEqual(log_class_probabilities(params.structural).shape, (1, 2, 3))
        self.assertRaises(ValueError, log_class_probabilities, params.structural, Z[:, :1])

    def test_relabel_permutes_probabilities(self):
        params = self.create_covariate_params()
        low, high = np.array([2, 0, 1]), np.array([1, 0])
        relabelled = relabel_params(params, low, high)
        Z = np.column_stack([np.ones(4), [-1., 0., 0.5, 2.]])

        old = log_class_probabilities(params.structural, Z)
        new = log_class_probabilities(relabelled.structural, Z)
        npt.assert_allclose(new, old[:, high][:, :, low], atol=1e-12)
        npt.assert_allclose(relabelled.phi, params.phi[:, low])
        npt.assert_allclose(relabelled.omega, params.omega[high])

        swapped_back = relabel_params(relabel_params(params, [1, 0, 2], [1, 0]), [1, 0, 2], [1, 0])
        npt.assert_allclose(swapped_back.gamma, params.gamma, atol=1e-12)

    def test_relabel_needs_permutation(self):
        self.assertRaises(ValueError, relabel_params, self.create_toy_params(), [0, 0])
