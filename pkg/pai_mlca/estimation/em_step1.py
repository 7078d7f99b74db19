# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
EM estimation of the unconditional multilevel latent class model (no covariates). This is the first step of the
two-step estimator: it provides the measurement parameters that are kept fixed in the second step.
"""

from __future__ import absolute_import, division

import logging
import time
import warnings
from collections import namedtuple

import numpy as np
from statsmodels.tools.sm_exceptions import ConvergenceWarning

from pai_mlca import defaults
from pai_mlca.model.core import MeasurementParams, StructuralParams, ModelParams, check_identifiability
from pai_mlca.model.posterior import e_step, UNCONDITIONAL
from pai_mlca.utilities.distribution import get_distributor
from pai_mlca.utilities.exceptions import DegenerateClassError, NumericalError
from pai_mlca.utilities.seeding import derive_rng

_logger = logging.getLogger(__name__)

MEASUREMENT = "measurement"
STRUCTURAL = "structural"


class EmControl(namedtuple("EmControl", "max_iter tol n_starts seed")):
    """
    Stopping rule and multi-start settings of an EM run.

    :param max_iter: maximal number of EM sweeps per start
    :param tol: threshold on the relative change ``|l_k - l_{k-1}| / (1 + |l_k|)``
    :param n_starts: number of random starts in addition to the hierarchical (or given) start
    :param seed: master seed, None for fresh entropy
    """
    __slots__ = ()

    def __new__(cls, max_iter=defaults.EM_MAX_ITER, tol=defaults.EM_TOL, n_starts=defaults.N_STARTS, seed=None):
        if int(max_iter) < 1:
            raise ValueError("max_iter must be at least 1, got {}".format(max_iter))
        if not tol > 0:
            raise ValueError("tol must be positive, got {}".format(tol))
        if int(n_starts) < 0:
            raise ValueError("n_starts must not be negative, got {}".format(n_starts))
        return super(EmControl, cls).__new__(cls, int(max_iter), float(tol), int(n_starts), seed)

    def single_start(self):
        return EmControl(self.max_iter, self.tol, 0, self.seed)


Step1Fit = namedtuple("Step1Fit", "params loglik_trace converged n_iter best_start_index elapsed posteriors "
                                  "start_logliks")

EmRun = namedtuple("EmRun", "params posteriors trace converged")


def _check_fixed(fixed):
    fixed = tuple(fixed)
    unknown = set(fixed) - {MEASUREMENT, STRUCTURAL}
    if unknown:
        raise ValueError("Unknown parameter blocks {}".format(sorted(unknown)))
    if len(set(fixed)) == 2:
        raise ValueError("At least one parameter block has to be free")
    return fixed


def _check_mass(mass, level):
    empty = np.flatnonzero(mass < defaults.DEGENERATE_TOL)
    if empty.size:
        raise DegenerateClassError(level, int(empty[0]))


def m_step_unconditional(post, dataset, current=None, fixed=()):
    """
    Closed form M-step of the unconditional model:

        * ``omega[m] = sum_j u[j, m] / J``
        * ``pi[m, t] = sum_ij v[ij, t, m] / sum_ij,t v[ij, t, m]``
        * ``phi[h, t] = sum_ij,m v[ij, t, m] y[ij, h] / sum_ij,m v[ij, t, m]``

    The results are clamped into the interior and renormalised by the parameter constructors.

    :param post: the posteriors of the E-step
    :type post: pai_mlca.model.posterior.Posteriors
    :param dataset: the data
    :type dataset: pai_mlca.model.core.Dataset
    :param current: the current parameters, needed if blocks are fixed
    :type current: pai_mlca.model.core.ModelParams
    :param fixed: blocks to keep at their current value, "measurement" and/or "structural"
    :type fixed: tuple

    :return: the updated parameters
    :rtype: pai_mlca.model.core.ModelParams

    :raise: ``DegenerateClassError`` if a class to be updated has no posterior mass.
    """
    fixed = _check_fixed(fixed)
    if fixed and current is None:
        raise ValueError("Fixed blocks need the current parameters")

    if MEASUREMENT in fixed:
        measurement = current.measurement
    else:
        low_mass = post.v.sum(axis=(0, 2))
        _check_mass(low_mass, "low")
        phi = dataset.Y.T.dot(post.v.sum(axis=2)) / low_mass
        measurement = MeasurementParams(np.clip(phi, 0, 1))

    if STRUCTURAL in fixed:
        structural = current.structural
    else:
        high_mass = post.u.sum(axis=0)
        _check_mass(high_mass, "high")
        v_tm = post.v.sum(axis=0)
        structural = StructuralParams(high_mass / dataset.J, pi=(v_tm / v_tm.sum(axis=0)).T)

    return ModelParams(measurement, structural)


def iterate_em(dataset, params, ctrl, m_step, mode=UNCONDITIONAL):
    """
    Alternates E- and M-steps from ``params`` until the relative log-likelihood change falls below ``ctrl.tol``
    or ``ctrl.max_iter`` sweeps were done. The trace starts with the log-likelihood of ``params``.

    :param m_step: callable ``(posteriors, params) -> params``
    :type m_step: callable

    :return: the final parameters, their posteriors, the log-likelihood trace and the convergence flag
    :rtype: EmRun
    """
    post = e_step(dataset, params, mode)
    trace = [post.loglik]
    converged = False
    for iteration in range(ctrl.max_iter):
        params = m_step(post, params)
        post = e_step(dataset, params, mode)
        trace.append(post.loglik)
        _logger.debug("EM iteration %d: loglik %.10f", iteration + 1, post.loglik)
        if abs(trace[-1] - trace[-2]) / (1. + abs(trace[-1])) < ctrl.tol:
            converged = True
            break
    return EmRun(params, post, np.array(trace), converged)


def random_start(dims, rng, base=None, fixed=()):
    """
    Random parameters: Dirichlet(1) proportions and item probabilities uniform on [0.1, 0.9]. Fixed blocks are
    copied from ``base``.
    """
    if MEASUREMENT in fixed:
        measurement = base.measurement
    else:
        measurement = MeasurementParams(rng.uniform(0.1, 0.9, size=(dims.H, dims.T)))
    if STRUCTURAL in fixed:
        structural = base.structural
    else:
        structural = StructuralParams(rng.dirichlet(np.ones(dims.M)),
                                      pi=rng.dirichlet(np.ones(dims.T), size=dims.M))
    return ModelParams(measurement, structural)


def check_dims(dataset, dims, params=None):
    if dims.J != dataset.J or tuple(dims.n) != tuple(dataset.sizes) or dims.H != dataset.H:
        raise ValueError("Dimensions {} do not match {!r}".format(dims, dataset))
    if params is not None and (params.T != dims.T or params.M != dims.M or params.H != dims.H):
        raise ValueError("Parameters with T={}, M={}, H={} do not match {}".format(params.T, params.M, params.H,
                                                                                  dims))


def _run_start(job, dataset, ctrl, fixed):
    index, params = job

    def m_step(post, current):
        return m_step_unconditional(post, dataset, current=current, fixed=fixed)

    try:
        run = iterate_em(dataset, params, ctrl, m_step)
    except DegenerateClassError as e:
        _logger.warning("Start %d aborted: %s", index, e)
        return [(index, None)]
    _logger.info("Start %d: %d iterations, loglik %.6f", index, len(run.trace) - 1, run.trace[-1])
    return [(index, run)]


def pick_best_run(runs):
    """
    The run with the highest final log-likelihood, the lowest start index wins ties.

    :param runs: pairs of start index and EmRun (None for aborted starts)
    :type runs: list

    :return: index and run
    :rtype: tuple
    """
    finished = [(index, run) for index, run in runs if run is not None]
    if not finished:
        raise NumericalError("All {} starts ran into degenerate classes".format(len(runs)))
    return max(finished, key=lambda item: (item[1].trace[-1], -item[0]))


def warn_if_not_converged(converged, n_iter, what):
    if not converged:
        warnings.warn("{} did not converge after {} iterations".format(what, n_iter), ConvergenceWarning)


def fit_unconditional(dataset, dims, init=None, ctrl=None, fixed=(), n_jobs=0, distributor=None):
    """
    Fits the unconditional multilevel latent class model by EM from the hierarchical start (or ``init``) and
    ``ctrl.n_starts`` random starts, and returns the start with the highest final log-likelihood. Starts that run
    into an empty class are aborted.

    :param dataset: the data, only the responses and groups are used
    :type dataset: pai_mlca.model.core.Dataset
    :param dims: the model dimensions
    :type dims: pai_mlca.model.core.ModelDims
    :param init: first start, defaults to :func:`~pai_mlca.estimation.initialization.hierarchical_init`
    :type init: pai_mlca.model.core.ModelParams
    :param ctrl: EM control settings
    :type ctrl: EmControl
    :param fixed: blocks kept at their initial value, "measurement" and/or "structural"
    :type fixed: tuple
    :param n_jobs: The number of processes to use for the starts. If zero, no parallelization is used.
    :type n_jobs: int
    :param distributor: Advanced parameter: see :mod:`pai_mlca.utilities.distribution`.
    :type distributor: pai_mlca.utilities.distribution.DistributorBaseClass

    :return: the best fit
    :rtype: Step1Fit
    """
    ctrl = ctrl or EmControl()
    fixed = _check_fixed(fixed)
    check_dims(dataset, dims)
    if fixed and init is None:
        raise ValueError("Fixed blocks need an initial value")

    start_time = time.time()
    if init is None:
        from pai_mlca.estimation.initialization import hierarchical_init
        init = hierarchical_init(dataset, dims, seed=ctrl.seed, ctrl=ctrl)
    check_dims(dataset, dims, init)

    report = check_identifiability(dims, init)
    if not report.ok:
        _logger.warning("Identifiability preconditions violated at the start: %s", "; ".join(report.violations))

    starts = [init] + [random_start(dims, derive_rng(ctrl.seed, 1, s), init, fixed) for s in range(ctrl.n_starts)]

    distributor, owned = get_distributor(n_jobs, distributor, progressbar_title="EM starts")
    try:
        runs = distributor.map_reduce(_run_start, data=list(enumerate(starts)),
                                      function_kwargs={"dataset": dataset, "ctrl": ctrl, "fixed": fixed})
    finally:
        if owned:
            distributor.close()

    best_index, best = pick_best_run(runs)
    n_iter = len(best.trace) - 1
    warn_if_not_converged(best.converged, n_iter, "Step 1 EM")

    return Step1Fit(params=best.params, loglik_trace=best.trace, converged=best.converged, n_iter=n_iter,
                    best_start_index=best_index, elapsed=time.time() - start_time, posteriors=best.posteriors,
                    start_logliks=tuple(np.nan if run is None else run.trace[-1] for _, run in runs))
