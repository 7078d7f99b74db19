# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

import os
import shutil
import tempfile
from unittest import TestCase

import numpy as np
import pandas as pd
import pytest
from sklearn.pipeline import Pipeline

from pai_mlca.examples.multilevel_simulation import condition, generate
from pai_mlca.scripts import run_mlca
from pai_mlca.transformers import MultilevelLatentClass
from pai_mlca.utilities.dataframe_functions import dataset_to_frame


@pytest.mark.slow
class FullPipelineTestCase(TestCase):

    def setUp(self):
        self.dataset, self.truth = generate(condition(36, J=50), seed=7)
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def test_sklearn_pipeline(self):
        groups = self.dataset.group_labels[self.dataset.group_index]
        Z = self.dataset.Z[:, 1:]
        pipe = Pipeline([("model", MultilevelLatentClass(n_low_classes=3, n_high_classes=2, random_state=3))])
        pipe.fit(self.dataset.Y, model__groups=groups, model__Z=Z)

        predicted = pipe.predict(self.dataset.Y, groups=groups, Z=Z)
        self.assertEqual(len(predicted), self.dataset.N)
        self.assertEqual(set(np.unique(predicted)), {0, 1, 2})

    def test_command_line(self):
        input_file = os.path.join(self.test_dir, "data.csv")
        out = os.path.join(self.test_dir, "out")
        dataset_to_frame(self.dataset, "school").to_csv(input_file, index=False)

        arguments = "fit --input {} --out {} --group-col school --items y1..y10 --covariates z --T 3 --M 2 " \
                    "--method all --seed 5 --n-starts 1".format(input_file, out)
        self.assertEqual(run_mlca.main(arguments.split()), run_mlca.EXIT_OK)

        coefficients = pd.read_csv(os.path.join(out, "coefficients.csv"), header=[0, 1], index_col=0)
        self.assertEqual(list(coefficients.columns.get_level_values(0).unique()),
                         ["one_step", "two_step", "two_stage"])
        estimates = coefficients.xs("estimate", axis=1, level=1)
        self.assertLess((estimates["two_step"] - estimates["one_step"]).abs().max(), 0.1)
        for method in ("one_step", "two_step", "two_stage"):
            self.assertTrue(os.path.exists(os.path.join(out, "{}_posteriors_low.csv".format(method))))
