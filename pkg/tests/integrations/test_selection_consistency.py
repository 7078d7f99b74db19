# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

import pytest

from pai_mlca.estimation.em_step1 import EmControl
from pai_mlca.examples.multilevel_simulation import condition, generate
from pai_mlca.selection.selection import hierarchical_select

REPLICATES = 50


@pytest.mark.slow
def test_hierarchical_select_recovers_the_class_numbers():
    cond = condition(36)
    assert (cond.J, cond.n_low) == (100, 500)

    hits = 0
    for replicate in range(REPLICATES):
        dataset, _ = generate(cond, seed=replicate)
        result = hierarchical_select(dataset, [1, 2, 3, 4], [1, 2, 3], ctrl=EmControl(n_starts=1, seed=replicate))
        hits += (result.T, result.M) == (3, 2)
    assert hits >= 0.9 * REPLICATES
