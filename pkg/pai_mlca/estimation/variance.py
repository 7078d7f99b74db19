# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Analytic score contributions of the multilevel latent class model and the covariance of the two-step estimator
corrected for the estimation of the item probabilities in the first step.

All scores are taken with respect to the log-linear parameters and laid out as

    * alpha: ``log(omega[m] / omega[0])`` for m = 1..M-1,
    * Gamma: row-major by (m, t, k) for t = 1..T-1,
    * beta: ``logit(phi[h, t])`` row-major by (t, h).

The group level score of alpha, ``u[j, m] - omega[m]``, is shared equally among the ``n_j`` units of the group.
"""

from __future__ import absolute_import, division

import logging
from collections import namedtuple

import numpy as np
import scipy.linalg

from pai_mlca import defaults
from pai_mlca.model.posterior import UNCONDITIONAL, CONDITIONAL, unit_log_class_probabilities
from pai_mlca.utilities.exceptions import NumericalError

_logger = logging.getLogger(__name__)


class ScoreBlocks(namedtuple("ScoreBlocks", "alpha gamma beta")):
    """
    Per unit score contributions, each block an N x p matrix.
    """
    __slots__ = ()

    @property
    def theta2(self):
        return np.hstack([self.alpha, self.gamma])

    @property
    def stacked(self):
        return np.hstack([self.alpha, self.gamma, self.beta])


class CovarianceEstimate(namedtuple("CovarianceEstimate", "I22 I21 Sigma11 V2 V1 V N")):
    """
    Asymptotic covariance of the structural estimates: ``V = V2 + V1`` with ``V2 = I22^-1`` and
    ``V1 = I22^-1 I21 Sigma11 I21' I22^-1``. The finite sample covariance is ``V / N``.
    """
    __slots__ = ()

    @property
    def covariance(self):
        return self.V / self.N

    @property
    def naive_covariance(self):
        return self.V2 / self.N

    @property
    def standard_errors(self):
        return np.sqrt(np.clip(np.diag(self.V), 0, None) / self.N)

    @property
    def naive_standard_errors(self):
        return np.sqrt(np.clip(np.diag(self.V2), 0, None) / self.N)


def score_contributions(dataset, params, post, mode):
    """
    Score contributions of every unit at ``params``:

        * alpha: ``(u[j, m] - omega[m]) / n_j``
        * Gamma: ``u[j, m] (q[ij, t | m] - pi[ij, t | m]) Z_ij``
        * beta: ``sum_m v[ij, t, m] (y[ij, h] - phi[h, t])``

    :param dataset: the data
    :type dataset: pai_mlca.model.core.Dataset
    :param params: the parameters the posteriors were computed at
    :type params: pai_mlca.model.core.ModelParams
    :param post: the posteriors
    :type post: pai_mlca.model.posterior.Posteriors
    :param mode: "unconditional" (intercept only, Pi) or "conditional" (Gamma and Z)
    :type mode: str

    :rtype: ScoreBlocks
    """
    N = dataset.N
    unit_u = post.u[dataset.group_index]
    unit_size = dataset.sizes[dataset.group_index].astype(float)

    alpha = ((unit_u - params.omega) / unit_size[:, None])[:, 1:]

    pi = np.exp(unit_log_class_probabilities(dataset, params.structural, mode)).transpose(0, 2, 1)
    residual = (post.q - pi)[:, 1:, :].transpose(0, 2, 1)
    Z = dataset.Z if mode == CONDITIONAL else np.ones((N, 1))
    gamma = (unit_u[:, :, None, None] * residual[:, :, :, None] * Z[:, None, None, :]).reshape(N, -1)

    low = post.v.sum(axis=2)
    beta = (low[:, :, None] * (dataset.Y[:, None, :] - params.phi.T[None, :, :])).reshape(N, -1)

    return ScoreBlocks(alpha=alpha, gamma=gamma, beta=beta)


def score_step1(dataset, params, post):
    """
    Score contributions of the unconditional model, see :func:`score_contributions`.
    """
    return score_contributions(dataset, params, post, UNCONDITIONAL)


def score_step2(dataset, params, post):
    """
    Score contributions of the covariate model at the step 2 estimates, the beta block evaluated at the fixed
    item probabilities.
    """
    return score_contributions(dataset, params, post, CONDITIONAL)


def opg(scores):
    """
    Outer product of gradients ``N^-1 sum_i s_i s_i'``.
    """
    scores = np.asarray(scores)
    return scores.T.dot(scores) / scores.shape[0]


def inverse_information(matrix, name="information matrix"):
    """
    Inverse of a symmetric positive definite matrix via its Cholesky factor. A ridge of ``RIDGE`` (relative to the
    largest diagonal entry) is added with a warning if the factorisation fails.

    :raise: ``NumericalError`` with the condition number if the matrix is still singular.
    """
    matrix = (matrix + matrix.T) / 2.
    p = matrix.shape[0]
    if p == 0:
        return np.zeros((0, 0))
    identity = np.eye(p)
    try:
        factor = scipy.linalg.cho_factor(matrix)
    except np.linalg.LinAlgError:
        ridge = defaults.RIDGE * max(1., np.max(np.abs(np.diag(matrix))))
        _logger.warning("The %s is not positive definite, adding a ridge of %g", name, ridge)
        try:
            factor = scipy.linalg.cho_factor(matrix + ridge * identity)
        except np.linalg.LinAlgError:
            raise NumericalError("The {} is numerically singular (condition number {:.3g})"
                                 .format(name, np.linalg.cond(matrix)))
    inverse = scipy.linalg.cho_solve(factor, identity)
    return (inverse + inverse.T) / 2.


def corrected_covariance(step1_scores, step2_scores):
    """
    Covariance of the two-step structural estimates:

        * ``I22 = N^-1 sum s2 s2'`` over the structural block of the step 2 scores,
        * ``I21 = N^-1 sum s2 s1'`` with the beta block of the step 2 scores,
        * ``Sigma11`` the beta block of the inverse step 1 outer product information.

    :param step1_scores: score contributions at the step 1 estimates
    :type step1_scores: ScoreBlocks
    :param step2_scores: score contributions at the step 2 estimates
    :type step2_scores: ScoreBlocks

    :rtype: CovarianceEstimate
    """
    s2 = step2_scores.theta2
    N = s2.shape[0]

    I22 = opg(s2)
    I21 = s2.T.dot(step2_scores.beta) / N

    n_beta = step1_scores.beta.shape[1]
    step1_inverse = inverse_information(opg(step1_scores.stacked), "step 1 information matrix")
    Sigma11 = step1_inverse[-n_beta:, -n_beta:] if n_beta else np.zeros((0, 0))

    V2 = inverse_information(I22, "step 2 information matrix")
    A = V2.dot(I21)
    V1 = A.dot(Sigma11).dot(A.T)
    V1 = (V1 + V1.T) / 2.
    return CovarianceEstimate(I22=I22, I21=I21, Sigma11=Sigma11, V2=V2, V1=V1, V=V2 + V1, N=N)


def naive_covariance(step2_scores):
    """
    ``I22^-1`` only, the step 1 estimates treated as known.

    :rtype: CovarianceEstimate
    """
    s2 = step2_scores.theta2
    N = s2.shape[0]
    I22 = opg(s2)
    V2 = inverse_information(I22, "step 2 information matrix")
    p = V2.shape[0]
    return CovarianceEstimate(I22=I22, I21=None, Sigma11=None, V2=V2, V1=np.zeros((p, p)), V=V2, N=N)


def full_information_covariance(scores):
    """
    Structural block of the inverse outer product information of all parameters (one-step maximum likelihood).

    :rtype: CovarianceEstimate
    """
    stacked = scores.stacked
    N = stacked.shape[0]
    p2 = scores.alpha.shape[1] + scores.gamma.shape[1]
    V = inverse_information(opg(stacked), "information matrix")[:p2, :p2]
    return CovarianceEstimate(I22=None, I21=None, Sigma11=None, V2=V, V1=np.zeros_like(V), V=V, N=N)
