# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Log-likelihood and E-step of the multilevel latent class model.

The posteriors are obtained by the upward-downward scheme, entirely in the log domain: the unit mixture terms
``log sum_t pi_t|m f_t(y_ij)`` are summed within every group (upward), normalised over the high-level classes with
log-sum-exp, and then pushed back down to the units as ``v = u * q``.
"""

from __future__ import absolute_import, division

import logging
from collections import namedtuple

import numpy as np
from scipy.special import logsumexp

from pai_mlca.model.core import log_class_probabilities
from pai_mlca.utilities.exceptions import NumericalError

_logger = logging.getLogger(__name__)

UNCONDITIONAL = "unconditional"
CONDITIONAL = "conditional"

Posteriors = namedtuple("Posteriors", "u q v loglik group_loglik")
Posteriors.__doc__ = """
``u`` (J x M): P(W_j = m | Y_j); ``q`` (N x T x M): P(X_ij = t | W_j = m, Y_ij); ``v`` (N x T x M): u * q;
``loglik``: observed data log-likelihood; ``group_loglik`` (J,): per group contributions.
"""


def item_logdensity(dataset, measurement):
    """
    ``log P(Y_ij | X_ij = t) = sum_h y log phi[h, t] + (1 - y) log(1 - phi[h, t])``.

    :param dataset: the data
    :type dataset: pai_mlca.model.core.Dataset
    :param measurement: the (clamped) item probabilities
    :type measurement: pai_mlca.model.core.MeasurementParams

    :return: N x T matrix
    :rtype: numpy.ndarray
    """
    phi = measurement.phi
    if phi.shape[0] != dataset.H:
        raise ValueError("phi has {} items but the data has {}".format(phi.shape[0], dataset.H))
    Y = dataset.Y
    return Y.dot(np.log(phi)) + (1 - Y).dot(np.log1p(-phi))


def unit_log_class_probabilities(dataset, structural, mode):
    if mode == UNCONDITIONAL:
        return log_class_probabilities(structural)
    if mode == CONDITIONAL:
        if structural.K != dataset.K:
            raise ValueError("gamma has {} covariate columns but the data has {}".format(structural.K, dataset.K))
        return log_class_probabilities(structural, dataset.Z)
    raise ValueError("mode must be '{}' or '{}', got {!r}".format(UNCONDITIONAL, CONDITIONAL, mode))


def e_step(dataset, params, mode=UNCONDITIONAL):
    """
    Computes the posteriors and the log-likelihood at ``params``.

    In conditional mode the class probabilities of every unit follow the multinomial logit on ``dataset.Z``,
    otherwise ``params.pi`` is used for all units.

    The group sums use :func:`numpy.add.reduceat` in the fixed group order, so the result does not depend on how
    the computation is scheduled.

    :param dataset: the data
    :type dataset: pai_mlca.model.core.Dataset
    :param params: the model parameters
    :type params: pai_mlca.model.core.ModelParams
    :param mode: "unconditional" or "conditional"
    :type mode: str

    :return: the posteriors
    :rtype: Posteriors

    :raise: ``ValueError`` for inconsistent dimensions, ``NumericalError`` if a group log-likelihood is not finite.
    """
    measurement, structural = params
    if measurement.T != structural.T:
        raise ValueError("phi has {} classes but pi has {}".format(measurement.T, structural.T))

    log_f = item_logdensity(dataset, measurement)
    log_pi = unit_log_class_probabilities(dataset, structural, mode)

    joint = log_pi + log_f[:, None, :]
    log_unit = logsumexp(joint, axis=2)
    log_group = np.add.reduceat(log_unit, dataset.offsets, axis=0) + np.log(structural.omega)
    group_loglik = logsumexp(log_group, axis=1)

    finite = np.isfinite(group_loglik)
    if not finite.all():
        j = int(np.flatnonzero(~finite)[0])
        raise NumericalError("Non-finite log-likelihood in group {!r}".format(dataset.group_labels[j]))

    u = np.exp(log_group - group_loglik[:, None])
    q = np.exp(joint - log_unit[:, :, None]).transpose(0, 2, 1)
    v = u[dataset.group_index][:, None, :] * q

    return Posteriors(u=u, q=q, v=v, loglik=float(np.sum(group_loglik)), group_loglik=group_loglik)


def loglik(dataset, params, mode=UNCONDITIONAL):
    """
    Observed data log-likelihood; the same number as ``e_step(dataset, params, mode).loglik``.

    :rtype: float
    """
    return e_step(dataset, params, mode).loglik


def map_classes(dataset, posteriors):
    """
    Maximum a posteriori classification.

    :return: the low-level class of every (sorted) unit and the high-level class of every group, 0-based
    :rtype: tuple of numpy.ndarray
    """
    low = posteriors.v.sum(axis=2).argmax(axis=1)
    high = posteriors.u.argmax(axis=1)
    return low, high
