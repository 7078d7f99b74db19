# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Synthetic data from the multilevel latent class model with covariates.

The simulation design has 2 high-level and 3 low-level classes, 10 binary items and one standard normal covariate.
36 conditions cross

    * the high-level separation (moderate or large intercepts), outermost,
    * the low-level separation (probability 0.7, 0.8 or 0.9 of the most likely response),
    * the number of groups (30, 50 or 100),
    * the group size (100 or 500), innermost.

Low-level class 1 is likely to answer 1 on all items, class 2 only on items 6 to 10 and class 3 on none.

>>> dataset, truth = generate(condition(36), seed=1)
>>> dataset
Dataset(J=100, N=50000, H=10, K=2)
"""

from __future__ import absolute_import, division

import logging
from collections import namedtuple

import numpy as np
import pandas as pd

from pai_mlca.model.core import Dataset, ModelParams, log_class_probabilities
from pai_mlca.utilities.seeding import derive_rng

_logger = logging.getLogger(__name__)

N_CONDITIONS = 36
H_ITEMS = 10
T_CLASSES = 3
M_CLASSES = 2

HL_SEPARATION = ("moderate", "large")
HL_INTERCEPTS = {"moderate": ((-0.85, -1.38), (0.85, 1.38)),
                 "large": ((-1.38, -2.07), (1.38, 2.07))}
LL_SEPARATION = ("small", "moderate", "large")
PHI_HIGH = {"small": 0.7, "moderate": 0.8, "large": 0.9}
GROUP_COUNTS = (30, 50, 100)
GROUP_SIZES = (100, 500)
SLOPES = ((-0.25, -0.25), (0.25, 0.25))
OMEGA = (0.5, 0.5)


class SimCondition(namedtuple("SimCondition", "cid n_low J ll_sep hl_sep phi_high intercepts slopes omega")):
    """
    One cell of the simulation design. ``intercepts[m]`` and ``slopes[m]`` hold the logit coefficients of the
    low-level classes 2 and 3 (against class 1) in high-level class m.
    """
    __slots__ = ()

    @property
    def N(self):
        return self.J * self.n_low

    def item_probabilities(self):
        """
        H x 3 matrix: class 1 high on every item, class 2 high on the second half only, class 3 low everywhere.
        """
        high, low = self.phi_high, 1. - self.phi_high
        half = H_ITEMS // 2
        phi = np.empty((H_ITEMS, T_CLASSES))
        phi[:, 0] = high
        phi[:half, 1] = low
        phi[half:, 1] = high
        phi[:, 2] = low
        return phi

    def truth(self):
        """
        :return: the true parameters, Gamma with the columns (intercept, slope)
        :rtype: pai_mlca.model.core.ModelParams
        """
        gamma = np.stack([np.column_stack([self.intercepts[m], self.slopes[m]]) for m in range(M_CLASSES)])
        return ModelParams.from_arrays(self.item_probabilities(), self.omega, gamma=gamma)

    def describe(self):
        return {"condition": self.cid, "n_low": self.n_low, "J": self.J, "ll_sep": self.ll_sep,
                "hl_sep": self.hl_sep, "phi_high": self.phi_high, "omega": list(self.omega)}


def condition(cid, **overrides):
    """
    The simulation condition with the 1-based id ``cid``; any field can be overridden, e.g. ``slopes`` or ``J``.

    :rtype: SimCondition
    """
    cid = int(cid)
    if not 1 <= cid <= N_CONDITIONS:
        raise ValueError("Condition ids run from 1 to {}, got {}".format(N_CONDITIONS, cid))
    index = cid - 1
    hl_sep = HL_SEPARATION[index // 18]
    ll_sep = LL_SEPARATION[(index % 18) // 6]
    cond = SimCondition(cid=cid,
                        n_low=GROUP_SIZES[index % 2],
                        J=GROUP_COUNTS[(index % 6) // 2],
                        ll_sep=ll_sep,
                        hl_sep=hl_sep,
                        phi_high=PHI_HIGH[ll_sep],
                        intercepts=HL_INTERCEPTS[hl_sep],
                        slopes=SLOPES,
                        omega=OMEGA)
    unknown = set(overrides) - set(SimCondition._fields)
    if unknown:
        raise ValueError("Unknown condition fields {}".format(sorted(unknown)))
    return cond._replace(**overrides)


def conditions_table(conditions):
    return pd.DataFrame([c.describe() for c in conditions]).set_index("condition")


def _draw(rng, truth, group, Z, covariate_names):
    N = len(group)
    J = group.max() + 1
    W = rng.choice(truth.M, size=J, p=truth.omega)

    class_probabilities = np.exp(log_class_probabilities(truth.structural, Z))[np.arange(N), W[group]]
    cumulative = np.cumsum(class_probabilities, axis=1)
    X = np.minimum((rng.random(N)[:, None] > cumulative).sum(axis=1), truth.T - 1)

    Y = (rng.random((N, truth.H)) < truth.phi.T[X]).astype(np.int8)
    return Dataset(Y, group, Z, covariate_names=covariate_names), W, X


def generate(cond, seed=None, return_latent=False):
    """
    Draws a data set: the high-level classes from omega, a standard normal covariate for every unit, the low-level
    classes from the multinomial logit of the unit's high-level class and the items from their class profile.

    :param cond: the condition
    :type cond: SimCondition
    :param seed: seed of the draw; the same seed gives the same data
    :type seed: int
    :param return_latent: also return the drawn classes
    :type return_latent: bool

    :return: the data and the true parameters (and the high- and low-level classes)
    :rtype: tuple
    """
    rng = derive_rng(seed, 4, cond.cid)
    truth = cond.truth()
    group = np.repeat(np.arange(cond.J), cond.n_low)
    Z = np.column_stack([np.ones(cond.N), rng.standard_normal(cond.N)])
    dataset, W, X = _draw(rng, truth, group, Z, ["intercept", "z"])
    if return_latent:
        return dataset, truth, (W, X)
    return dataset, truth


SURVEY_COVARIATES = ["intercept", "gender", "books", "immigrant", "age", "ses", "interest"]


def survey_truth(H=10):
    """
    True parameters of :func:`load_synthetic_survey`: 3 high-level classes, 4 low-level classes and 6 covariates.

    :rtype: pai_mlca.model.core.ModelParams
    """
    half = H // 2
    phi = np.empty((H, 4))
    phi[:, 0] = 0.9
    phi[:half, 1], phi[half:, 1] = 0.75, 0.3
    phi[:half, 2], phi[half:, 2] = 0.3, 0.65
    phi[:, 3] = 0.1

    intercepts = np.array([[0.6, 0.2, -0.6], [-0.2, 0.5, 0.1], [-0.9, -0.4, 0.8]])
    sign = np.array([1., -1., 0.5, -0.5, 1., -1.])
    gamma = np.empty((3, 3, 7))
    gamma[:, :, 0] = intercepts
    for m in range(3):
        for t in range(3):
            gamma[m, t, 1:] = 0.3 * sign * (-1) ** (m + t)
    return ModelParams.from_arrays(phi, [0.45, 0.35, 0.2], gamma=gamma)


def load_synthetic_survey(seed=0, n_groups=24, group_size=3000):
    """
    A survey shaped data set: ``n_groups`` countries with ``group_size`` respondents each, 10 items, 4 low-level and
    3 high-level classes and 6 respondent covariates (binary, ordinal and continuous, standardised where not
    binary).

    :param seed: seed of the draw
    :type seed: int
    :param n_groups: number of groups
    :type n_groups: int
    :param group_size: units per group
    :type group_size: int

    :return: the data and the true parameters
    :rtype: tuple
    """
    truth = survey_truth()
    rng = derive_rng(seed, 4, 0)
    N = n_groups * group_size
    group = np.repeat(np.arange(n_groups), group_size)

    def standardise(x):
        return (x - x.mean()) / x.std()

    covariates = np.column_stack([
        rng.integers(0, 2, N),
        standardise(rng.integers(1, 6, N).astype(float)),
        (rng.random(N) < 0.15).astype(float),
        standardise(rng.normal(14.5, 0.6, N)),
        rng.standard_normal(N),
        standardise(rng.integers(1, 5, N).astype(float)),
    ])
    Z = np.column_stack([np.ones(N), covariates])
    dataset, _, _ = _draw(rng, truth, group, Z, SURVEY_COVARIATES)
    _logger.info("Synthetic survey: %r", dataset)
    return dataset, truth
