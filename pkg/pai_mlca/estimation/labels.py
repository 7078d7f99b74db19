# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Matching of latent class labels between two fits (or a fit and the true parameters) and the exact linear map of
the structural vector under a relabelling.
"""

from __future__ import absolute_import, division

import numpy as np
from scipy.optimize import linear_sum_assignment

from pai_mlca.model.core import full_eta


def total_variation_cost(estimate, reference):
    """
    ``cost[r, e] = 0.5 * sum_h |reference[h, r] - estimate[h, e]|``, the summed total variation distance between
    column ``r`` of the reference and column ``e`` of the estimate.
    """
    return 0.5 * np.abs(reference[:, :, None] - estimate[:, None, :]).sum(axis=0)


def match_columns(estimate, reference):
    """
    Permutation of the estimate's columns that minimises the total variation distance to the reference columns
    (Hungarian algorithm). New column ``t`` is old column ``perm[t]``.

    :rtype: numpy.ndarray
    """
    _, perm = linear_sum_assignment(total_variation_cost(np.asarray(estimate), np.asarray(reference)))
    return perm


def label_permutations(params, reference):
    """
    Low-level labels are matched on the Phi columns, then the high-level labels on the rows of Pi (with the
    low-level classes already matched).

    :param params: the estimates
    :type params: pai_mlca.model.core.ModelParams
    :param reference: the reference parameters, e.g. the truth of a simulation
    :type reference: pai_mlca.model.core.ModelParams

    :return: low-level and high-level permutations
    :rtype: tuple
    """
    low = match_columns(params.phi, reference.phi)
    high = match_columns(params.pi[:, low].T, reference.pi.T)
    return low, high


def _relabel_structural_vector(theta, M, T, K, low, high):
    a = np.concatenate([[0.], theta[:M - 1]])
    alpha = a[high][1:] - a[high][0]
    eta = full_eta(theta[M - 1:].reshape(M, T - 1, K))[high][:, low, :]
    return np.concatenate([alpha, (eta[:, 1:, :] - eta[:, :1, :]).ravel()])


def structural_relabel_matrix(M, T, K, low, high):
    """
    Matrix ``R`` with ``theta_new = R theta`` for the structural vector ``(alpha, vec Gamma)`` when the classes are
    relabelled; covariances transform as ``R C R'``.

    :rtype: numpy.ndarray
    """
    p = M - 1 + M * (T - 1) * K
    return np.column_stack([_relabel_structural_vector(e, M, T, K, np.asarray(low), np.asarray(high))
                            for e in np.eye(p)]).reshape(p, p)


def relabel_posteriors(post, low, high):
    return post._replace(u=post.u[:, high], q=post.q[:, low][:, :, high], v=post.v[:, low][:, :, high])
