# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Monte Carlo comparison of the estimators on the simulation conditions: data generation, fitting, label alignment
to the truth and aggregation to bias, standard deviation, coverage and computing time.
"""

from __future__ import absolute_import, division

import logging
from collections import namedtuple

import numpy as np
import pandas as pd

from pai_mlca import defaults
from pai_mlca.estimation.em_step1 import EmControl
from pai_mlca.estimation.estimators import ESTIMATORS, METHODS, ONE_STEP, align_labels
from pai_mlca.examples.multilevel_simulation import SimCondition, condition, generate
from pai_mlca.model.core import structural_vector
from pai_mlca.utilities.distribution import get_distributor
from pai_mlca.utilities.exceptions import NumericalError
from pai_mlca.utilities.seeding import derive_seed
from pai_mlca.utilities.string_manipulation import structural_parameter_names

_logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["condition", "replicate", "estimator", "parameter", "truth", "estimate", "se", "covered",
                  "n_iter", "elapsed", "cpu_time", "converged", "failed"]

METRIC_COLUMNS = ["condition", "estimator", "parameter", "truth", "mean_estimate", "bias", "sd", "relative_sd",
                  "mean_se", "coverage", "cpu_time", "relative_cpu_time", "elapsed", "n_iter", "convergence_rate",
                  "n_ok", "unreliable"]

LONG_METRICS = ["bias", "sd", "relative_sd", "coverage", "cpu_time", "relative_cpu_time"]

StudyMetrics = namedtuple("StudyMetrics", "records metrics failures")
StudyMetrics.__doc__ = """
``records``: one row per condition, replicate, estimator and parameter (one row with parameter None for a failed
fit); ``metrics``: the aggregates per condition, estimator and parameter; ``failures``: number and rate of failed
fits per condition and estimator, ``unreliable`` when the rate exceeds the threshold.
"""


def _fit_records(method, dataset, truth, cond, replicate, ctrl):
    base = {"condition": cond.cid, "replicate": replicate, "estimator": method}
    try:
        result = align_labels(ESTIMATORS[method](dataset, dataset.dims(truth.T, truth.M), ctrl=ctrl), truth)
    except NumericalError as e:
        _logger.warning("Condition %d, replicate %d, %s failed: %s", cond.cid, replicate, method, e)
        return [dict(base, parameter=None, truth=np.nan, estimate=np.nan, se=np.nan, covered=np.nan,
                     n_iter=np.nan, elapsed=np.nan, cpu_time=np.nan, converged=False, failed=True)]

    true_theta = structural_vector(truth.structural)
    estimate, se = result.theta2, result.standard_errors
    covered = np.abs(estimate - true_theta) <= defaults.CI_Z * se
    names = structural_parameter_names(truth.M, truth.T, dataset.covariate_names)
    return [dict(base, parameter=names[i], truth=true_theta[i], estimate=estimate[i], se=se[i],
                 covered=bool(covered[i]), n_iter=result.total_iterations, elapsed=result.total_elapsed,
                 cpu_time=result.total_cpu_time, converged=result.converged_all, failed=False)
            for i in range(len(names))]


def _run_replicate(job, estimators, ctrl, seed):
    cond, replicate = job
    dataset, truth = generate(cond, seed=derive_seed(seed, 5, cond.cid, replicate))
    fit_ctrl = EmControl(ctrl.max_iter, ctrl.tol, ctrl.n_starts, derive_seed(seed, 6, cond.cid, replicate))
    records = []
    for method in estimators:
        records += _fit_records(method, dataset, truth, cond, replicate, fit_ctrl)
    return records


def run_study(conditions, R, estimators=METHODS, seed=None, n_jobs=defaults.N_PROCESSES, ctrl=None,
              distributor=None, failure_threshold=defaults.FAILURE_THRESHOLD):
    """
    Runs the simulation study: ``R`` data sets per condition, every estimator fitted on each of them and aligned to
    the true class labels. Data and fit seeds are derived from ``seed``, the condition and the replicate, so the
    results do not depend on the number of workers.

    :param conditions: condition ids (1 to 36) or conditions
    :type conditions: iterable
    :param R: replicates per condition
    :type R: int
    :param estimators: names of the estimators, see :data:`pai_mlca.estimation.estimators.METHODS`
    :type estimators: iterable of str
    :param seed: master seed
    :type seed: int
    :param n_jobs: The number of processes to use for the replicates, by default half of the cores. If zero, no
        parallelization is used.
    :type n_jobs: int
    :param ctrl: EM settings of every fit, the seed is replaced per replicate
    :type ctrl: pai_mlca.estimation.em_step1.EmControl
    :param distributor: Advanced parameter: see :mod:`pai_mlca.utilities.distribution`.
    :type distributor: pai_mlca.utilities.distribution.DistributorBaseClass
    :param failure_threshold: failure rate above which a cell is flagged unreliable
    :type failure_threshold: float

    :return: the records and their aggregates
    :rtype: StudyMetrics
    """
    if int(R) < 2:
        raise ValueError("At least 2 replicates are needed, got {}".format(R))
    estimators = list(estimators)
    unknown = [m for m in estimators if m not in ESTIMATORS]
    if unknown or not estimators:
        raise ValueError("Unknown estimators {}, choose from {}".format(unknown, ", ".join(METHODS)))
    conditions = [c if isinstance(c, SimCondition) else condition(c) for c in conditions]
    if not conditions:
        raise ValueError("No simulation condition given")
    ctrl = ctrl or EmControl()

    jobs = [(cond, r) for cond in conditions for r in range(int(R))]
    distributor, owned = get_distributor(n_jobs, distributor, disable_progressbar=defaults.DISABLE_PROGRESSBAR,
                                         progressbar_title="Replicates")
    try:
        records = distributor.map_reduce(_run_replicate, data=jobs,
                                         function_kwargs={"estimators": estimators, "ctrl": ctrl, "seed": seed},
                                         chunk_size=defaults.CHUNKSIZE)
    finally:
        if owned:
            distributor.close()

    return aggregate(records, failure_threshold)


def aggregate(records, failure_threshold=defaults.FAILURE_THRESHOLD):
    """
    Aggregates replicate records to the study metrics: bias and standard deviation of the estimates, the standard
    deviation relative to the one-step estimator, coverage of the Wald intervals, mean computing times (also
    relative to one-step) and the convergence rate. Failed fits are left out and counted.

    :param records: the replicate records
    :type records: list of dict or pandas.DataFrame

    :rtype: StudyMetrics
    """
    records = pd.DataFrame(records, columns=RECORD_COLUMNS)
    records["failed"] = records["failed"].astype(bool)
    fit_keys = ["condition", "replicate", "estimator"]
    cell_keys = ["condition", "estimator"]
    keys = ["condition", "estimator", "parameter"]

    fits = records.drop_duplicates(fit_keys)
    failures = fits.groupby(cell_keys).agg(n_replicates=("failed", "size"),
                                           n_failed=("failed", "sum")).reset_index()
    failures["failure_rate"] = failures["n_failed"] / failures["n_replicates"]
    failures["unreliable"] = failures["failure_rate"] > failure_threshold
    for _, row in failures[failures["unreliable"]].iterrows():
        _logger.warning("Condition %d, %s: %.0f%% of the fits failed, the cell is unreliable",
                        row["condition"], row["estimator"], 100 * row["failure_rate"])

    ok = records[~records["failed"]].copy()
    ok["error"] = ok["estimate"] - ok["truth"]
    ok["covered"] = ok["covered"].astype(float)
    ok["converged"] = ok["converged"].astype(float)
    metrics = ok.groupby(keys).agg(truth=("truth", "first"),
                                   mean_estimate=("estimate", "mean"),
                                   bias=("error", "mean"),
                                   sd=("estimate", "std"),
                                   mean_se=("se", "mean"),
                                   coverage=("covered", "mean"),
                                   cpu_time=("cpu_time", "mean"),
                                   elapsed=("elapsed", "mean"),
                                   n_iter=("n_iter", "mean"),
                                   convergence_rate=("converged", "mean"),
                                   n_ok=("estimate", "size")).reset_index()

    reference = metrics[metrics["estimator"] == ONE_STEP].set_index(["condition", "parameter"])
    lookup = pd.MultiIndex.from_frame(metrics[["condition", "parameter"]])
    metrics["relative_sd"] = metrics["sd"].values / reference["sd"].reindex(lookup).values
    metrics["relative_cpu_time"] = metrics["cpu_time"].values / reference["cpu_time"].reindex(lookup).values

    metrics = metrics.merge(failures[cell_keys + ["unreliable"]], on=cell_keys, how="left")
    return StudyMetrics(records=records, metrics=metrics[METRIC_COLUMNS], failures=failures)


def to_long(metrics):
    """
    Plot ready long format of the study metrics: one row per condition, estimator, parameter and metric.

    :param metrics: ``StudyMetrics.metrics``
    :type metrics: pandas.DataFrame

    :rtype: pandas.DataFrame
    """
    return (metrics.melt(id_vars=["condition", "estimator", "parameter"], value_vars=LONG_METRICS,
                         var_name="metric", value_name="value")
            .sort_values(["condition", "estimator", "parameter", "metric"])
            .reset_index(drop=True))
