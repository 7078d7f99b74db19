# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
The three estimators of the multilevel latent class model with covariates and their common result type.

    * ``two_step``: the unconditional model is fitted first, its item probabilities are frozen and the structural
      parameters are estimated in a second EM. Standard errors are corrected for the first step.
    * ``one_step``: full maximum likelihood of all parameters at once.
    * ``two_stage``: a pooled single-level model, alternating multilevel EM updates of the structural and the
      measurement part, and the covariate model on top. Standard errors are the uncorrected ones.
"""

from __future__ import absolute_import, division

import logging
import time

import numpy as np
import pandas as pd
from scipy.stats import norm

from pai_mlca import defaults
from pai_mlca.estimation.em_step1 import (EmControl, MEASUREMENT, STRUCTURAL, check_dims, fit_unconditional,
                                          iterate_em, m_step_unconditional, pick_best_run, random_start,
                                          warn_if_not_converged)
from pai_mlca.estimation.em_step2 import check_design, fit_structural, initial_structural, m_step_structural
from pai_mlca.estimation.initialization import hierarchical_init, hierarchical_start, reorder_classes
from pai_mlca.estimation.labels import label_permutations, relabel_posteriors, structural_relabel_matrix
from pai_mlca.estimation.variance import (CovarianceEstimate, corrected_covariance, full_information_covariance,
                                          naive_covariance, score_contributions, score_step1, score_step2)
from pai_mlca.model.core import ModelParams, relabel_params, structural_vector
from pai_mlca.model.posterior import CONDITIONAL, e_step, map_classes, unit_log_class_probabilities
from pai_mlca.utilities.distribution import get_distributor
from pai_mlca.utilities.exceptions import DegenerateClassError
from pai_mlca.utilities.seeding import derive_rng
from pai_mlca.utilities.string_manipulation import structural_parameter_names

_logger = logging.getLogger(__name__)

ONE_STEP = "one_step"
TWO_STEP = "two_step"
TWO_STAGE = "two_stage"
METHODS = (ONE_STEP, TWO_STEP, TWO_STAGE)

CORRECTED = "corrected"
NAIVE = "naive"
FULL_ML = "full_ML"

ALPHA_SE_NOTE = ("standard errors of alpha are conservative: the group level score is shared equally among "
                 "the units of the group")


def significance_stars(p_value):
    """*** for p < 0.01, ** for p < 0.05, * for p < 0.1."""
    if not np.isfinite(p_value):
        return ""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    if p_value < 0.1:
        return "*"
    return ""


class FitResult(object):
    """
    Estimates of one estimator on one data set.

    :param method: "one_step", "two_step" or "two_stage"
    :type method: str
    :param dims: the model dimensions
    :type dims: pai_mlca.model.core.ModelDims
    :param params: the final estimates (Gamma in covariate form)
    :type params: pai_mlca.model.core.ModelParams
    :param covariance_tag: "corrected", "naive" or "full_ML"
    :type covariance_tag: str
    :param covariance_estimate: the asymptotic covariance of the structural vector
    :type covariance_estimate: pai_mlca.estimation.variance.CovarianceEstimate
    :param posteriors: the posteriors in covariate mode at ``params``
    :type posteriors: pai_mlca.model.posterior.Posteriors
    :param covariate_names: names of the design columns
    :type covariate_names: list
    :param n_iter: EM iterations per phase
    :type n_iter: dict
    :param elapsed: wall clock seconds per phase
    :type elapsed: dict
    :param cpu_time: process CPU seconds per phase
    :type cpu_time: dict
    :param converged: convergence flag per phase
    :type converged: dict
    """

    def __init__(self, method, dims, params, covariance_tag, covariance_estimate, posteriors, covariate_names,
                 n_iter, elapsed, cpu_time, converged):
        if method not in METHODS:
            raise ValueError("Unknown method {!r}".format(method))
        self.method = method
        self.dims = dims
        self.params = params
        self.covariance_tag = covariance_tag
        self.covariance_estimate = covariance_estimate
        self.posteriors = posteriors
        self.covariate_names = list(covariate_names)
        self.n_iter = dict(n_iter)
        self.elapsed = dict(elapsed)
        self.cpu_time = dict(cpu_time)
        self.converged = dict(converged)

    @property
    def loglik(self):
        return self.posteriors.loglik

    @property
    def theta1(self):
        """vec(Phi), column by column."""
        return self.params.phi.ravel(order="F")

    @property
    def theta2(self):
        return structural_vector(self.params.structural)

    @property
    def omega(self):
        return self.params.omega

    @property
    def covariance(self):
        return self.covariance_estimate.covariance

    @property
    def naive_covariance(self):
        return self.covariance_estimate.naive_covariance

    @property
    def standard_errors(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    @property
    def naive_standard_errors(self):
        return np.sqrt(np.clip(np.diag(self.naive_covariance), 0, None))

    @property
    def parameter_names(self):
        return structural_parameter_names(self.params.M, self.params.T, self.covariate_names)

    @property
    def converged_all(self):
        return all(self.converged.values())

    @property
    def total_iterations(self):
        return int(sum(self.n_iter.values()))

    @property
    def total_elapsed(self):
        return float(sum(self.elapsed.values()))

    @property
    def total_cpu_time(self):
        return float(sum(self.cpu_time.values()))

    def coefficient_table(self, z_critical=defaults.CI_Z):
        """
        Estimates of the structural vector with standard errors, z statistics, two-sided normal p-values,
        significance stars and Wald confidence intervals.
        With more than one high-level class ``attrs["note"]`` carries :data:`ALPHA_SE_NOTE`.

        :rtype: pandas.DataFrame
        """
        estimate = self.theta2
        se = self.standard_errors
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, estimate / se, np.nan)
        p_value = 2 * norm.sf(np.abs(z))
        table = pd.DataFrame({"estimate": estimate,
                              "se": se,
                              "z": z,
                              "p_value": p_value,
                              "stars": [significance_stars(p) for p in p_value],
                              "ci_lower": estimate - z_critical * se,
                              "ci_upper": estimate + z_critical * se},
                             index=pd.Index(self.parameter_names, name="parameter"),
                             columns=["estimate", "se", "z", "p_value", "stars", "ci_lower", "ci_upper"])
        if self.params.M > 1:
            table.attrs["note"] = ALPHA_SE_NOTE
        return table

    def class_proportions(self, dataset):
        """
        Low-level class proportions within every high-level class, averaged over the covariate values of all units.

        :rtype: pandas.DataFrame
        """
        pi = np.exp(unit_log_class_probabilities(dataset, self.params.structural, CONDITIONAL)).mean(axis=0)
        return pd.DataFrame(pi, index=pd.Index(["W{}".format(m + 1) for m in range(self.params.M)], name="high"),
                            columns=["X{}".format(t + 1) for t in range(self.params.T)])

    def map_classes(self, dataset):
        return map_classes(dataset, self.posteriors)

    def relabel(self, low_perm, high_perm):
        """
        The same fit with renamed classes (new class t is old class ``low_perm[t]``). The structural vector and all
        covariance blocks are transformed exactly.

        :rtype: FitResult
        """
        low, high = np.asarray(low_perm, dtype=int), np.asarray(high_perm, dtype=int)
        params = relabel_params(self.params, low, high)
        R = structural_relabel_matrix(self.params.M, self.params.T, self.params.K, low, high)
        R_inv = np.linalg.inv(R)
        H = self.params.H
        P = np.eye(self.params.T * H)[(low[:, None] * H + np.arange(H)).ravel()]

        def congruence(A, B):
            return None if A is None else B.dot(A).dot(B.T)

        old = self.covariance_estimate
        estimate = CovarianceEstimate(I22=congruence(old.I22, R_inv.T),
                                      I21=None if old.I21 is None else R_inv.T.dot(old.I21).dot(P.T),
                                      Sigma11=congruence(old.Sigma11, P),
                                      V2=congruence(old.V2, R), V1=congruence(old.V1, R), V=congruence(old.V, R),
                                      N=old.N)
        return FitResult(self.method, self.dims, params, self.covariance_tag, estimate,
                         relabel_posteriors(self.posteriors, low, high), self.covariate_names,
                         self.n_iter, self.elapsed, self.cpu_time, self.converged)

    def summary(self):
        """
        JSON serialisable description of the fit.

        :rtype: dict
        """
        return {"method": self.method,
                "covariance": self.covariance_tag,
                "loglik": self.loglik,
                "T": self.params.T, "M": self.params.M, "K": self.params.K,
                "omega": self.omega.tolist(),
                "n_iter": self.n_iter,
                "elapsed": self.elapsed,
                "cpu_time": self.cpu_time,
                "converged": self.converged,
                "notes": [ALPHA_SE_NOTE] if self.params.M > 1 else []}

    def __repr__(self):
        return "FitResult(method={!r}, T={}, M={}, K={}, loglik={:.4f})".format(
            self.method, self.params.T, self.params.M, self.params.K, self.loglik)


class _PhaseClock(object):
    def __init__(self):
        self.elapsed = {}
        self.cpu_time = {}
        self._wall, self._cpu = time.time(), time.process_time()

    def lap(self, phase):
        wall, cpu = time.time(), time.process_time()
        self.elapsed[phase] = wall - self._wall
        self.cpu_time[phase] = cpu - self._cpu
        self._wall, self._cpu = wall, cpu


def _check_inputs(dataset, dims):
    check_dims(dataset, dims)
    if dims.K != dataset.K:
        raise ValueError("dims has K={} but the design matrix has {} columns".format(dims.K, dataset.K))
    check_design(dataset)


def _step1_at_canonical_labels(dataset, fit):
    params = reorder_classes(fit.params)
    if params is fit.params:
        return params, fit.posteriors
    return params, e_step(dataset, params)


def fit_two_step(dataset, dims, ctrl=None, n_jobs=0, distributor=None):
    """
    Two-step estimator. Step 1 fits the unconditional model by multi-start EM; its item probabilities are then held
    fixed while step 2 estimates omega and Gamma of the covariate model. The covariance is corrected for the
    sampling variability of step 1.

    :param dataset: the data including the design matrix
    :type dataset: pai_mlca.model.core.Dataset
    :param dims: the model dimensions
    :type dims: pai_mlca.model.core.ModelDims
    :param ctrl: EM settings, used for both steps
    :type ctrl: pai_mlca.estimation.em_step1.EmControl
    :param n_jobs: The number of processes to use for the step 1 starts. If zero, no parallelization is used.
    :type n_jobs: int
    :param distributor: Advanced parameter: see :mod:`pai_mlca.utilities.distribution`.
    :type distributor: pai_mlca.utilities.distribution.DistributorBaseClass

    :return: the fit with covariance tag "corrected"
    :rtype: FitResult
    """
    ctrl = ctrl or EmControl()
    _check_inputs(dataset, dims)
    clock = _PhaseClock()

    step1 = fit_unconditional(dataset, dims, ctrl=ctrl, n_jobs=n_jobs, distributor=distributor)
    params1, post1 = _step1_at_canonical_labels(dataset, step1)
    scores1 = score_step1(dataset, params1, post1)
    clock.lap("step1")

    step2 = fit_structural(dataset, params1.measurement, initial_structural(params1, dataset.K), ctrl)
    estimate = corrected_covariance(scores1, score_step2(dataset, step2.params, step2.posteriors))
    clock.lap("step2")

    _logger.info("Two-step fit: %d + %d iterations, loglik %.6f", step1.n_iter, step2.n_iter,
                 step2.posteriors.loglik)
    return FitResult(TWO_STEP, dims, step2.params, CORRECTED, estimate, step2.posteriors, dataset.covariate_names,
                     n_iter={"step1": step1.n_iter, "step2": step2.n_iter},
                     elapsed=clock.elapsed, cpu_time=clock.cpu_time,
                     converged={"step1": step1.converged, "step2": step2.converged})


def _full_m_step(dataset):
    def m_step(post, current):
        measurement = m_step_unconditional(post, dataset, current, fixed=(STRUCTURAL,)).measurement
        return ModelParams(measurement, m_step_structural(post, dataset, current))
    return m_step


def _run_full_start(job, dataset, ctrl):
    index, params = job
    try:
        run = iterate_em(dataset, params, ctrl, _full_m_step(dataset), mode=CONDITIONAL)
    except DegenerateClassError as e:
        _logger.warning("Start %d aborted: %s", index, e)
        return [(index, None)]
    _logger.info("Start %d: %d iterations, loglik %.6f", index, len(run.trace) - 1, run.trace[-1])
    return [(index, run)]


def fit_one_step(dataset, dims, ctrl=None, n_jobs=0, distributor=None):
    """
    Full information maximum likelihood: EM on the covariate model updating Phi, omega and Gamma together, from the
    hierarchical start and ``ctrl.n_starts`` random starts. The covariance is the structural block of the inverse
    outer product information of all parameters.

    :return: the fit with covariance tag "full_ML"
    :rtype: FitResult
    """
    ctrl = ctrl or EmControl()
    _check_inputs(dataset, dims)
    clock = _PhaseClock()

    init = hierarchical_init(dataset, dims, seed=ctrl.seed, ctrl=ctrl)
    starts = [init] + [random_start(dims, derive_rng(ctrl.seed, 1, s), init) for s in range(ctrl.n_starts)]
    starts = [ModelParams(p.measurement, initial_structural(p, dataset.K)) for p in starts]

    distributor, owned = get_distributor(n_jobs, distributor, progressbar_title="EM starts")
    try:
        runs = distributor.map_reduce(_run_full_start, data=list(enumerate(starts)),
                                      function_kwargs={"dataset": dataset, "ctrl": ctrl})
    finally:
        if owned:
            distributor.close()

    best_index, best = pick_best_run(runs)
    n_iter = len(best.trace) - 1
    warn_if_not_converged(best.converged, n_iter, "One-step EM")

    params = reorder_classes(best.params)
    post = best.posteriors if params is best.params else e_step(dataset, params, CONDITIONAL)
    estimate = full_information_covariance(score_contributions(dataset, params, post, CONDITIONAL))
    clock.lap("full")

    _logger.info("One-step fit: best start %d, %d iterations, loglik %.6f", best_index, n_iter, post.loglik)
    return FitResult(ONE_STEP, dims, params, FULL_ML, estimate, post, dataset.covariate_names,
                     n_iter={"full": n_iter}, elapsed=clock.elapsed, cpu_time=clock.cpu_time,
                     converged={"full": best.converged})


def fit_two_stage(dataset, dims, ctrl=None, n_jobs=0, distributor=None):
    """
    Two-stage estimator:

        1. a pooled single-level latent class model (K-modes started, as in the hierarchical initialisation)
           gives the item probabilities,
        2. a. multilevel EM for (omega, Pi) with Phi fixed,
           b. multilevel EM for Phi with (omega, Pi) fixed at the 2.a estimates,
        3. the covariate model on top of the 2.b item probabilities.

    The covariance ignores the estimation of Phi.

    :return: the fit with covariance tag "naive"
    :rtype: FitResult
    """
    ctrl = ctrl or EmControl()
    _check_inputs(dataset, dims)
    clock = _PhaseClock()

    details = hierarchical_start(dataset, dims, seed=ctrl.seed, ctrl=ctrl)
    clock.lap("stage1")

    single = ctrl.single_start()
    stage_2a = fit_unconditional(dataset, dims, init=details.params, ctrl=single, fixed=(MEASUREMENT,),
                                 n_jobs=n_jobs, distributor=distributor)
    clock.lap("stage2a")
    stage_2b = fit_unconditional(dataset, dims, init=stage_2a.params, ctrl=single, fixed=(STRUCTURAL,),
                                 n_jobs=n_jobs, distributor=distributor)
    params_b, _ = _step1_at_canonical_labels(dataset, stage_2b)
    clock.lap("stage2b")

    stage_b = fit_structural(dataset, params_b.measurement, initial_structural(params_b, dataset.K), ctrl)
    estimate = naive_covariance(score_step2(dataset, stage_b.params, stage_b.posteriors))
    clock.lap("stageB")

    n_iter = {"stage1": details.single_level.n_iter, "stage2a": stage_2a.n_iter, "stage2b": stage_2b.n_iter,
              "stageB": stage_b.n_iter}
    _logger.info("Two-stage fit: %d iterations in total, loglik %.6f", sum(n_iter.values()),
                 stage_b.posteriors.loglik)
    return FitResult(TWO_STAGE, dims, stage_b.params, NAIVE, estimate, stage_b.posteriors, dataset.covariate_names,
                     n_iter=n_iter, elapsed=clock.elapsed, cpu_time=clock.cpu_time,
                     converged={"stage1": details.single_level.converged, "stage2a": stage_2a.converged,
                                "stage2b": stage_2b.converged, "stageB": stage_b.converged})


ESTIMATORS = {ONE_STEP: fit_one_step, TWO_STEP: fit_two_step, TWO_STAGE: fit_two_stage}


def fit(dataset, dims, method=TWO_STEP, ctrl=None, n_jobs=0, distributor=None):
    """
    Dispatches to one of :func:`fit_one_step`, :func:`fit_two_step` and :func:`fit_two_stage`.
    """
    try:
        estimator = ESTIMATORS[method]
    except KeyError:
        raise ValueError("Unknown method {!r}, choose from {}".format(method, ", ".join(METHODS)))
    return estimator(dataset, dims, ctrl=ctrl, n_jobs=n_jobs, distributor=distributor)


def align_labels(result, reference):
    """
    Relabels ``result`` so that its item probability columns are closest (in total variation) to those of
    ``reference`` and its high-level classes match on Pi.

    :param result: the fit
    :type result: FitResult
    :param reference: reference parameters, e.g. the truth or another fit's ``params``
    :type reference: pai_mlca.model.core.ModelParams

    :rtype: FitResult
    """
    low, high = label_permutations(result.params, reference)
    return result.relabel(low, high)


def compare_coefficients(results):
    """
    Side by side coefficient tables of several fits (estimate, standard error and stars per method). The fits
    should carry the same class labels, see :func:`align_labels`.

    :param results: the fits
    :type results: list of FitResult

    :rtype: pandas.DataFrame
    """
    results = list(results)
    if not results:
        raise ValueError("Nothing to compare")
    tables = [r.coefficient_table()[["estimate", "se", "stars"]] for r in results]
    return pd.concat(tables, axis=1, keys=[r.method for r in results])
