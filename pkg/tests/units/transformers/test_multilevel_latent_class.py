# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

from unittest import TestCase

import numpy as np
import numpy.testing as npt
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pai_mlca.examples.multilevel_simulation import condition, generate
from pai_mlca.transformers import MultilevelLatentClass


class MultilevelLatentClassTestCase(TestCase):

    @classmethod
    def setUpClass(cls):
        dataset, _ = generate(condition(36, J=15, n_low=40), seed=1)
        cls.X = dataset.Y
        cls.groups = dataset.group_labels[dataset.group_index]
        cls.Z = dataset.Z[:, 1:]
        cls.model = MultilevelLatentClass(n_low_classes=3, n_high_classes=2, n_starts=0, random_state=1)
        cls.model.fit(cls.X, groups=cls.groups, Z=cls.Z)

    def test_fitted_attributes(self):
        self.assertEqual(self.model.result_.method, "two_step")
        self.assertEqual((self.model.params_.T, self.model.params_.M, self.model.params_.K), (3, 2, 2))
        self.assertEqual(clone(self.model).get_params()["n_low_classes"], 3)

    def test_predictions_follow_the_row_order(self):
        proba = self.model.predict_proba(self.X, groups=self.groups, Z=self.Z)
        self.assertEqual(proba.shape, (len(self.X), 3))
        npt.assert_allclose(proba.sum(axis=1), 1.)

        order = np.random.RandomState(0).permutation(len(self.X))
        shuffled = self.model.predict_proba(self.X[order], groups=self.groups[order], Z=self.Z[order])
        npt.assert_allclose(shuffled, proba[order], atol=1e-12)
        npt.assert_array_equal(self.model.predict(self.X, groups=self.groups, Z=self.Z), proba.argmax(axis=1))

    def test_groups_and_score(self):
        high = self.model.predict_groups(self.X, groups=self.groups, Z=self.Z)
        self.assertEqual(len(high), 15)
        self.assertTrue(set(high) <= {0, 1})
        score = self.model.score(self.X, groups=self.groups, Z=self.Z)
        self.assertAlmostEqual(score, self.model.result_.loglik / len(self.X), places=8)

    def test_invalid_use(self):
        model = MultilevelLatentClass(n_low_classes=2)
        self.assertRaises(NotFittedError, model.predict, self.X, groups=self.groups)
        self.assertRaises(ValueError, model.fit, self.X)
