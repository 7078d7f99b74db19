# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Selection of the numbers of low- and high-level classes one level at a time:

    1. single-level models (M = 1) over the T range, T chosen by BIC with the number of units,
    2. multilevel models over the M range with that T, M chosen by BIC with the number of groups,
    3. the T range again with M fixed, as the low-level choice may change once the group level is modelled.

All fits are of the unconditional model. Cells that fail numerically stay in the table, flagged, and are skipped.
"""

from __future__ import absolute_import, division

import logging
from collections import namedtuple

import numpy as np
import pandas as pd

from pai_mlca.estimation.em_step1 import EmControl, fit_unconditional
from pai_mlca.selection.criteria import HIGH, LOW, entropy_r2, information_criteria
from pai_mlca.utilities.distribution import get_distributor
from pai_mlca.utilities.exceptions import NumericalError
from pai_mlca.utilities.seeding import derive_seed

_logger = logging.getLogger(__name__)

COLUMNS = ["phase", "T", "M", "loglik", "npar", "AIC", "BIC_N", "BIC_J", "entropy_r2_low", "entropy_r2_high",
           "n_iter", "converged", "failed", "error"]

SelectionResult = namedtuple("SelectionResult", "table T M T_first_phase")
SelectionResult.__doc__ = """
``table``: one row per phase and (T, M) cell; ``T``, ``M``: the selected numbers of classes; ``T_first_phase``:
the number of low-level classes chosen among the single-level models.
"""


def _cell_ctrl(ctrl, T, M):
    return EmControl(ctrl.max_iter, ctrl.tol, ctrl.n_starts, derive_seed(ctrl.seed, 3, T, M))


def _fit_cell(cell, dataset, ctrl):
    T, M = cell
    dims = dataset.dims(T, M)
    row = {"T": T, "M": M, "npar": dims.npar_unconditional}
    try:
        fit = fit_unconditional(dataset, dims, ctrl=_cell_ctrl(ctrl, T, M))
    except NumericalError as e:
        _logger.warning("Fit with T=%d, M=%d failed: %s", T, M, e)
        row.update(loglik=np.nan, AIC=np.nan, BIC_N=np.nan, BIC_J=np.nan, entropy_r2_low=np.nan,
                   entropy_r2_high=np.nan, n_iter=0, converged=False, failed=True, error=str(e))
        return [row]

    aic, bic_n, bic_j = information_criteria(fit.posteriors.loglik, dims.npar_unconditional, dataset.N, dataset.J)
    row.update(loglik=fit.posteriors.loglik, AIC=aic, BIC_N=bic_n, BIC_J=bic_j,
               entropy_r2_low=entropy_r2(fit.posteriors, LOW) if T > 1 else 1.,
               entropy_r2_high=entropy_r2(fit.posteriors, HIGH) if M > 1 else 1.,
               n_iter=fit.n_iter, converged=fit.converged, failed=False, error="")
    return [row]


def _best(rows, criterion):
    candidates = [row for row in rows if not row["failed"]]
    if not candidates:
        raise NumericalError("Every fit of the selection phase failed")
    return min(candidates, key=lambda row: (row[criterion], row["T"], row["M"]))


def hierarchical_select(dataset, T_range, M_range, ctrl=None, n_jobs=0, distributor=None):
    """
    Chooses the numbers of classes level by level, see the module documentation. Cells already fitted in an
    earlier phase are reused.

    :param dataset: the data, only the responses and groups are used
    :type dataset: pai_mlca.model.core.Dataset
    :param T_range: candidate numbers of low-level classes
    :type T_range: iterable of int
    :param M_range: candidate numbers of high-level classes
    :type M_range: iterable of int
    :param ctrl: EM settings; every cell gets its own seed derived from ``ctrl.seed``
    :type ctrl: pai_mlca.estimation.em_step1.EmControl
    :param n_jobs: The number of processes to use for the cells of a phase. If zero, no parallelization is used.
    :type n_jobs: int
    :param distributor: Advanced parameter: see :mod:`pai_mlca.utilities.distribution`.
    :type distributor: pai_mlca.utilities.distribution.DistributorBaseClass

    :return: the full table and the choice
    :rtype: SelectionResult
    """
    T_range = sorted(set(int(t) for t in T_range))
    M_range = sorted(set(int(m) for m in M_range))
    if not T_range or not M_range:
        raise ValueError("The ranges of class numbers must not be empty")
    if T_range[0] < 1 or M_range[0] < 1:
        raise ValueError("Class numbers must be at least 1")
    ctrl = ctrl or EmControl()

    cache = {}
    distributor, owned = get_distributor(n_jobs, distributor, progressbar_title="Class selection")

    def run_phase(phase, cells):
        missing = [cell for cell in cells if cell not in cache]
        if missing:
            for row in distributor.map_reduce(_fit_cell, data=missing,
                                              function_kwargs={"dataset": dataset, "ctrl": ctrl}):
                cache[(row["T"], row["M"])] = row
        return [dict(cache[cell], phase=phase) for cell in cells]

    try:
        first = run_phase(1, [(T, 1) for T in T_range])
        T_first = _best(first, "BIC_N")["T"]
        _logger.info("Phase 1: T=%d", T_first)

        second = run_phase(2, [(T_first, M) for M in M_range])
        M_best = _best(second, "BIC_J")["M"]
        _logger.info("Phase 2: M=%d", M_best)

        third = run_phase(3, [(T, M_best) for T in T_range])
        T_best = _best(third, "BIC_N")["T"]
    finally:
        if owned:
            distributor.close()

    if T_best != T_first:
        _logger.info("Phase 3 changed the number of low-level classes from %d to %d", T_first, T_best)
    else:
        _logger.info("Phase 3: T=%d", T_best)

    table = pd.DataFrame(first + second + third, columns=COLUMNS)
    return SelectionResult(table=table, T=T_best, M=M_best, T_first_phase=T_first)
