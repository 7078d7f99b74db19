# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

import numpy as np
import numpy.testing as npt
import statsmodels.api as sm
import pytest

from pai_mlca import defaults
from pai_mlca.estimation.em_step1 import EmControl, fit_unconditional
from pai_mlca.estimation.em_step2 import weighted_multinomial_fit, initial_structural, fit_structural
from pai_mlca.estimation.initialization import reorder_classes
from pai_mlca.model.core import Dataset
from tests.fixtures import DataTestCase


@pytest.fixture
def logistic_data():
    rng = np.random.default_rng(21)
    Z = np.column_stack([np.ones(400), rng.standard_normal(400)])
    probabilities = 1. / (1. + np.exp(-(0.3 + 1.2 * Z[:, 1])))
    y = (rng.uniform(size=400) < probabilities).astype(int)
    return Z, y


@pytest.fixture
def multinomial_data():
    rng = np.random.default_rng(22)
    Z = np.column_stack([np.ones(600), rng.standard_normal(600)])
    eta = np.column_stack([np.zeros(600), -0.2 + 0.8 * Z[:, 1], 0.4 - 0.6 * Z[:, 1]])
    p = np.exp(eta) / np.exp(eta).sum(axis=1, keepdims=True)
    y = (rng.uniform(size=(600, 1)) > p.cumsum(axis=1)).sum(axis=1)
    return Z, y


class TestWeightedMultinomialFit:

    def test_hard_labels_match_logit(self, logistic_data):
        Z, y = logistic_data
        q = np.column_stack([1 - y, y]).astype(float)
        gamma = weighted_multinomial_fit(Z, q, np.ones(len(y)), np.zeros((1, 2)))
        expected = sm.Logit(y, Z).fit(disp=0).params
        npt.assert_allclose(gamma[0], expected, atol=1e-6)

    def test_hard_labels_match_mnlogit(self, multinomial_data):
        Z, y = multinomial_data
        q = np.eye(3)[y]
        gamma = weighted_multinomial_fit(Z, q, np.ones(len(y)), np.zeros((2, 2)))
        expected = np.asarray(sm.MNLogit(y, Z).fit(disp=0).params).T
        npt.assert_allclose(gamma, expected, atol=1e-6)

    def test_soft_weights_zero_gradient(self, multinomial_data):
        Z, y = multinomial_data
        rng = np.random.default_rng(3)
        q = 0.7 * np.eye(3)[y] + 0.3 * rng.dirichlet(np.ones(3), size=len(y))
        u = rng.uniform(size=len(y))
        gamma = weighted_multinomial_fit(Z, q, u, np.zeros((2, 2)))

        eta = np.column_stack([np.zeros(len(y)), Z.dot(gamma.T)])
        pi = np.exp(eta) / np.exp(eta).sum(axis=1, keepdims=True)
        gradient = (u[:, None] * (q - pi))[:, 1:].T.dot(Z)
        assert np.max(np.abs(gradient)) < 1e-6

    def test_zero_weights_keep_start(self, logistic_data, caplog):
        Z, y = logistic_data
        init = np.array([[0.5, -0.5]])
        gamma = weighted_multinomial_fit(Z, np.column_stack([1 - y, y]), np.zeros(len(y)), init)
        npt.assert_array_equal(gamma, init)
        assert "zero" in caplog.text

    def test_separation_is_capped(self, caplog):
        z = np.array([-0.5, -0.3, -0.1, 0.1, 0.3, 0.5])
        Z = np.column_stack([np.ones(6), z])
        y = (z > 0).astype(int)
        gamma = weighted_multinomial_fit(Z, np.column_stack([1 - y, y]).astype(float), np.ones(6),
                                         np.zeros((1, 2)))
        assert np.max(np.abs(gamma)) <= defaults.COEFFICIENT_CAP
        assert gamma[0, 1] > 0
        assert "quasi-separation" in caplog.text


class FitStructuralTestCase(DataTestCase):

    def setUp(self):
        self.dataset, self.truth = self.create_simulated_dataset(J=20, n_low=60)
        step1 = fit_unconditional(self.dataset, self.dataset.dims(3, 2), ctrl=EmControl(n_starts=1, seed=4))
        self.step1 = reorder_classes(step1.params)

    def test_initial_structural(self):
        structural = initial_structural(self.step1, 2)
        self.assertEqual(structural.gamma.shape, (2, 2, 2))
        npt.assert_array_equal(structural.gamma[:, :, 1], 0.)
        npt.assert_allclose(structural.pi, self.step1.pi, atol=1e-9)
        npt.assert_array_equal(structural.omega, self.step1.omega)

    def test_measurement_never_changes(self):
        fit = fit_structural(self.dataset, self.step1.measurement, initial_structural(self.step1, 2))
        self.assertIs(fit.params.measurement, self.step1.measurement)
        self.assertTrue(np.all(np.diff(fit.loglik_trace) >= -1e-9 * np.abs(fit.loglik_trace[1:])))
        self.assertEqual(fit.n_iter, len(fit.loglik_trace) - 1)
        self.assertEqual(fit.gamma.shape, (2, 2, 2))

    def test_converges_from_zero_slopes(self):
        fit = fit_structural(self.dataset, self.step1.measurement, initial_structural(self.step1, 2),
                             EmControl(tol=1e-10))
        self.assertTrue(fit.converged)
        self.assertGreater(fit.loglik_trace[-1], fit.loglik_trace[0])

    def test_design_errors(self):
        Z = np.column_stack([np.ones(self.dataset.N), self.dataset.Z[:, 1], 2 * self.dataset.Z[:, 1]])
        deficient = Dataset(self.dataset.Y, self.dataset.group_index, Z)
        self.assertRaises(ValueError, fit_structural, deficient, self.step1.measurement,
                          initial_structural(self.step1, 3))
        self.assertRaises(ValueError, fit_structural, self.dataset, self.step1.measurement,
                          initial_structural(self.step1, 3))
