# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Second step of the two-step estimator: EM for the structural parameters (omega, Gamma) of the covariate model with
the item probabilities kept at their first step values. The M-step for Gamma consists of M independent weighted
multinomial logistic regressions, solved by Fisher scoring.
"""

from __future__ import absolute_import, division

import logging
import time
from collections import namedtuple

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from pai_mlca import defaults
from pai_mlca.estimation.em_step1 import EmControl, iterate_em, warn_if_not_converged, _check_mass
from pai_mlca.model.core import ModelParams, StructuralParams, numerical_rank
from pai_mlca.model.posterior import CONDITIONAL
from pai_mlca.utilities.exceptions import NumericalError

_logger = logging.getLogger(__name__)


class Step2Fit(namedtuple("Step2Fit", "params loglik_trace converged n_iter elapsed posteriors")):
    __slots__ = ()

    @property
    def omega(self):
        return self.params.omega

    @property
    def gamma(self):
        return self.params.gamma


def _log_softmax_with_reference(Z, gamma):
    eta = Z.dot(gamma.T)
    eta = np.hstack([np.zeros((Z.shape[0], 1)), eta])
    return eta - logsumexp(eta, axis=1, keepdims=True)


def _objective(Z, q, w, gamma):
    return float(np.sum(w * np.sum(q * _log_softmax_with_reference(Z, gamma), axis=1)))


def weighted_multinomial_fit(Z, q_m, u_m, init, max_iter=defaults.NEWTON_MAX_ITER, tol=defaults.NEWTON_TOL):
    """
    Maximises ``sum_i u_m[i] sum_t q_m[i, t] log pi_t(Z_i)`` over the coefficients of a multinomial logit with
    class 0 as reference, by Fisher scoring with step halving.

    The gradient is ``sum_i u_m[i] (q_m[i, t] - pi_t(Z_i)) Z_i`` for t >= 1 and the information is
    ``sum_i u_m[i] (diag(pi_i) - pi_i pi_i') kron Z_i Z_i'``.

    :param Z: N x K design matrix
    :type Z: numpy.ndarray
    :param q_m: N x T class weights, rows sum to one
    :type q_m: numpy.ndarray
    :param u_m: N unit weights (the high-level posterior of the unit's group)
    :type u_m: numpy.ndarray
    :param init: (T-1) x K starting coefficients
    :type init: numpy.ndarray
    :param max_iter: maximal number of scoring iterations
    :type max_iter: int
    :param tol: threshold on the infinity norm of the gradient
    :type tol: float

    :return: the (T-1) x K coefficients
    :rtype: numpy.ndarray

    :raise: ``NumericalError`` if the gradient did not vanish within ``max_iter`` iterations.
    """
    gamma = np.array(init, dtype=float)
    n_free = gamma.size
    if n_free == 0:
        return gamma
    if np.sum(u_m) < defaults.DEGENERATE_TOL:
        _logger.warning("All weights of the logistic regression are zero, keeping the starting coefficients")
        return gamma

    value = _objective(Z, q_m, u_m, gamma)
    for iteration in range(max_iter):
        pi = np.exp(_log_softmax_with_reference(Z, gamma))[:, 1:]
        gradient = (u_m[:, None] * (q_m[:, 1:] - pi)).T.dot(Z)
        gradient_norm = np.max(np.abs(gradient))
        if gradient_norm < tol:
            return gamma

        covariance = -pi[:, :, None] * pi[:, None, :]
        covariance[:, np.arange(pi.shape[1]), np.arange(pi.shape[1])] += pi
        information = np.einsum("n,nts,nk,nl->tksl", u_m, covariance, Z, Z, optimize=True).reshape(n_free, n_free)
        try:
            step = scipy.linalg.solve(information, gradient.ravel(), assume_a="pos").reshape(gamma.shape)
        except (np.linalg.LinAlgError, ValueError):
            step = np.linalg.lstsq(information, gradient.ravel(), rcond=None)[0].reshape(gamma.shape)

        for _ in range(defaults.MAX_STEP_HALVINGS + 1):
            candidate = gamma + step
            candidate_value = _objective(Z, q_m, u_m, candidate)
            if candidate_value >= value - 1e-12 * (1. + abs(value)):
                break
            step = step / 2.
        else:
            if gradient_norm < 1e-6 * max(1., np.sum(u_m)):
                _logger.debug("Step halving stalled at gradient norm %g, accepting", gradient_norm)
                return gamma
            raise NumericalError("Fisher scoring could not improve the objective, gradient norm {:g}"
                                 .format(gradient_norm))

        gamma, value = candidate, candidate_value
        if np.any(np.abs(gamma) > defaults.COEFFICIENT_CAP):
            _logger.warning("Coefficients beyond +-%g (quasi-separation), capping them", defaults.COEFFICIENT_CAP)
            return np.clip(gamma, -defaults.COEFFICIENT_CAP, defaults.COEFFICIENT_CAP)

    pi = np.exp(_log_softmax_with_reference(Z, gamma))[:, 1:]
    gradient_norm = np.max(np.abs((u_m[:, None] * (q_m[:, 1:] - pi)).T.dot(Z)))
    if gradient_norm < tol:
        return gamma
    raise NumericalError("Fisher scoring did not converge in {} iterations, gradient norm {:g}"
                         .format(max_iter, gradient_norm))


def initial_structural(params, K):
    """
    Structural starting values of the covariate model from unconditional estimates: omega is kept, the intercepts
    are ``log(pi[m, t] / pi[m, 0])`` and all other coefficients are zero.

    :param params: unconditional estimates
    :type params: pai_mlca.model.core.ModelParams
    :param K: number of design columns
    :type K: int

    :rtype: pai_mlca.model.core.StructuralParams
    """
    pi = params.pi
    gamma = np.zeros((params.M, params.T - 1, K))
    gamma[:, :, 0] = np.log(pi[:, 1:]) - np.log(pi[:, :1])
    return StructuralParams(params.omega, gamma=gamma)


def m_step_structural(post, dataset, current):
    """
    M-step of the covariate model for (omega, Gamma); the measurement part of ``current`` is kept.

    :rtype: pai_mlca.model.core.StructuralParams
    """
    high_mass = post.u.sum(axis=0)
    _check_mass(high_mass, "high")
    unit_weights = post.u[dataset.group_index]
    gamma = np.stack([weighted_multinomial_fit(dataset.Z, post.q[:, :, m], unit_weights[:, m], current.gamma[m])
                      for m in range(current.M)])
    return StructuralParams(high_mass / dataset.J, gamma=gamma)


def check_design(dataset):
    if not dataset.has_full_rank_design():
        raise ValueError("The design matrix does not have full column rank (rank {} < {})"
                         .format(numerical_rank(dataset.Z), dataset.K))


def fit_structural(dataset, phi_fixed, init, ctrl=None):
    """
    Fits omega and Gamma by EM with the item probabilities fixed at ``phi_fixed``. They are never updated.

    :param dataset: the data with its design matrix
    :type dataset: pai_mlca.model.core.Dataset
    :param phi_fixed: the first step item probabilities
    :type phi_fixed: pai_mlca.model.core.MeasurementParams
    :param init: starting values, usually :func:`initial_structural` of the first step estimates
    :type init: pai_mlca.model.core.StructuralParams
    :param ctrl: stopping rule, only ``max_iter`` and ``tol`` are used
    :type ctrl: pai_mlca.estimation.em_step1.EmControl

    :return: the fit
    :rtype: Step2Fit

    :raise: ``ValueError`` if the design matrix is rank deficient.
    """
    ctrl = ctrl or EmControl()
    check_design(dataset)
    if init.K != dataset.K:
        raise ValueError("Starting values have {} covariate columns, the data has {}".format(init.K, dataset.K))

    start_time = time.time()

    def m_step(post, current):
        return current.replace_structural(m_step_structural(post, dataset, current))

    run = iterate_em(dataset, ModelParams(phi_fixed, init), ctrl, m_step, mode=CONDITIONAL)
    n_iter = len(run.trace) - 1
    warn_if_not_converged(run.converged, n_iter, "Step 2 EM")
    _logger.info("Step 2: %d iterations, pseudo loglik %.6f", n_iter, run.trace[-1])
    return Step2Fit(params=run.params, loglik_trace=run.trace, converged=run.converged, n_iter=n_iter,
                    elapsed=time.time() - start_time, posteriors=run.posteriors)
