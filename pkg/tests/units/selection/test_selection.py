# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

import numpy as np
from mock import patch

from pai_mlca.estimation.em_step1 import EmControl
from pai_mlca.selection.selection import hierarchical_select, COLUMNS
from pai_mlca.utilities.exceptions import NumericalError
from tests.fixtures import DataTestCase

BIC_N = {(1, 1): 500., (2, 1): 400., (3, 1): 450.,
         (3, 2): 380., (1, 2): 600.}
BIC_J = {(2, 1): 300., (2, 2): 250., (2, 3): 260.}


def fake_cell(cell, dataset, ctrl):
    T, M = cell
    failed = (T, M) == (2, 3) and ctrl.seed == 13
    return [{"T": T, "M": M, "loglik": -100., "npar": T + M,
             "AIC": 0., "BIC_N": np.nan if failed else BIC_N.get((T, M), 390.),
             "BIC_J": np.nan if failed else BIC_J.get((T, M), 1000.),
             "entropy_r2_low": 1., "entropy_r2_high": 1., "n_iter": 3, "converged": True,
             "failed": failed, "error": "boom" if failed else ""}]


class HierarchicalSelectTestCase(DataTestCase):

    def setUp(self):
        self.dataset, _ = self.create_simulated_dataset(J=6, n_low=10)

    @patch("pai_mlca.selection.selection._fit_cell", side_effect=fake_cell)
    def test_three_phases(self, mocked):
        result = hierarchical_select(self.dataset, [1, 2, 3], [1, 2, 3], ctrl=EmControl(seed=0))
        self.assertEqual(result.T_first_phase, 2)
        self.assertEqual(result.M, 2)
        self.assertEqual(result.T, 3)
        self.assertEqual(list(result.table.columns), COLUMNS)
        self.assertEqual(list(result.table["phase"]), [1, 1, 1, 2, 2, 2, 3, 3, 3])
        # (2, 1) and (2, 2) are fitted once
        self.assertEqual(mocked.call_count, 7)

    @patch("pai_mlca.selection.selection._fit_cell", side_effect=fake_cell)
    def test_failed_cells_are_skipped(self, mocked):
        result = hierarchical_select(self.dataset, [2], [1, 2, 3], ctrl=EmControl(seed=13))
        self.assertEqual(result.M, 2)
        self.assertTrue(result.table["failed"].any())
        self.assertEqual(result.table.loc[result.table["failed"], "error"].iloc[0], "boom")

    @patch("pai_mlca.selection.selection._fit_cell")
    def test_every_cell_failed(self, mocked):
        mocked.side_effect = lambda cell, dataset, ctrl: [{"T": cell[0], "M": cell[1], "failed": True}]
        self.assertRaises(NumericalError, hierarchical_select, self.dataset, [1, 2], [1])

    def test_invalid_ranges(self):
        self.assertRaises(ValueError, hierarchical_select, self.dataset, [], [1])
        self.assertRaises(ValueError, hierarchical_select, self.dataset, [0, 1], [1])

    def test_single_cell(self):
        result = hierarchical_select(self.dataset, [1], [1], ctrl=EmControl(n_starts=0, seed=1))
        self.assertEqual((result.T, result.M), (1, 1))
        self.assertEqual(len(result.table), 3)
        row = result.table.iloc[0]
        self.assertEqual(row["npar"], 10)
        self.assertEqual(row["entropy_r2_low"], 1.)
        self.assertFalse(row["failed"])
        self.assertAlmostEqual(row["BIC_N"], -2 * row["loglik"] + 10 * np.log(self.dataset.N))

    def test_deterministic_table(self):
        ctrl = EmControl(n_starts=1, seed=5, max_iter=200)
        first = hierarchical_select(self.dataset, [1, 2], [1, 2], ctrl=ctrl)
        second = hierarchical_select(self.dataset, [1, 2], [1, 2], ctrl=ctrl)
        self.assertTrue(first.table["loglik"].equals(second.table["loglik"]))
        self.assertEqual((first.T, first.M), (second.T, second.M))
