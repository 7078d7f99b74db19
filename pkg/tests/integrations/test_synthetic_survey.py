# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

from unittest import TestCase

import pytest

from pai_mlca.estimation.em_step1 import EmControl
from pai_mlca.estimation.estimators import align_labels, fit_one_step, fit_two_step
from pai_mlca.examples.multilevel_simulation import load_synthetic_survey
from pai_mlca.scripts.run_mlca import format_coefficient_report


@pytest.mark.slow
class SyntheticSurveyTestCase(TestCase):

    @classmethod
    def setUpClass(cls):
        cls.dataset, cls.truth = load_synthetic_survey(seed=0)
        dims = cls.dataset.dims(4, 3)
        ctrl = EmControl(n_starts=0, seed=1)
        cls.two_step = fit_two_step(cls.dataset, dims, ctrl=ctrl)
        cls.one_step = align_labels(fit_one_step(cls.dataset, dims, ctrl=ctrl), cls.two_step.params)

    def test_two_step_needs_fewer_iterations(self):
        self.assertTrue(self.two_step.converged_all)
        self.assertTrue(self.one_step.converged_all)
        self.assertLess(self.two_step.n_iter["step2"], self.one_step.n_iter["full"])
        self.assertLess(self.two_step.total_elapsed, self.one_step.total_elapsed)

    def test_estimates_are_close(self):
        difference = abs(self.two_step.theta2 - self.one_step.theta2).max()
        self.assertLess(difference, 0.2)

    def test_report(self):
        report = format_coefficient_report([self.one_step, self.two_step])
        lines = report.splitlines()
        self.assertEqual(lines[0], "Logit coefficients of the low-level classes (reference class X1)")
        self.assertIn("one_step", lines[2])
        self.assertIn("W3 X4 interest", report)
        self.assertIn("***", report)
        self.assertTrue(lines[-1].startswith("*** p<0.01"))
