# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Model comparison statistics: information criteria with unit and group level sample sizes and the entropy based
R-squared of the class separation.
"""

from __future__ import absolute_import, division

import logging

import numpy as np
from scipy.special import entr

_logger = logging.getLogger(__name__)

LOW = "low"
HIGH = "high"


def information_criteria(loglik, npar, N, J):
    """
    ``AIC = -2 l + 2 p``, ``BIC_N = -2 l + p log N`` and ``BIC_J = -2 l + p log J``.

    :param loglik: the maximised log-likelihood
    :type loglik: float
    :param npar: number of free parameters
    :type npar: int
    :param N: number of units
    :type N: int or float
    :param J: number of groups
    :type J: int or float

    :return: AIC, BIC_N, BIC_J
    :rtype: tuple
    """
    if npar < 0:
        raise ValueError("npar must not be negative, got {}".format(npar))
    deviance = -2. * loglik
    return deviance + 2. * npar, deviance + npar * np.log(N), deviance + npar * np.log(J)


def entropy_r2(posteriors, level=LOW):
    """
    Entropy R-squared ``1 - sum_i E(p_i) / (n E(p_bar))``: one minus the posterior entropy summed over units (low
    level, posteriors ``sum_m v``) or groups (high level, posteriors ``u``), relative to the entropy of the marginal
    class distribution ``p_bar``. 1 means perfectly separated classes, 0 no separation at all.

    A single class gives 0 / 0; 1 is returned with a warning.

    :param posteriors: the posteriors of a fit
    :type posteriors: pai_mlca.model.posterior.Posteriors
    :param level: "low" or "high"
    :type level: str

    :return: the value in [0, 1]
    :rtype: float
    """
    if level == LOW:
        p = posteriors.v.sum(axis=2)
    elif level == HIGH:
        p = posteriors.u
    else:
        raise ValueError("level must be '{}' or '{}', got {!r}".format(LOW, HIGH, level))

    n, n_classes = p.shape
    marginal_entropy = n * entr(p.mean(axis=0)).sum()
    if n_classes == 1 or marginal_entropy <= 0:
        _logger.warning("Entropy R2 of the %s level with a single (occupied) class is set to 1", level)
        return 1.
    return float(np.clip(1. - entr(p).sum() / marginal_entropy, 0., 1.))
