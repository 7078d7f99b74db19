# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Starting values for the multilevel EM: K-modes pre-clustering of the response patterns, a pooled single-level
latent class fit for the item probabilities, a cross-tabulation of the two classifications for the conditional class
probabilities, and a canonical ordering of the low-level classes.
"""

from __future__ import absolute_import, division

import logging
from collections import namedtuple
from functools import cmp_to_key

import numpy as np

from pai_mlca import defaults
from pai_mlca.estimation.em_step1 import EmControl, fit_unconditional
from pai_mlca.model.core import ModelParams, MeasurementParams, StructuralParams, relabel_params
from pai_mlca.utilities.seeding import derive_rng, derive_seed

_logger = logging.getLogger(__name__)

KModesResult = namedtuple("KModesResult", "assignment modes cost n_iter cost_trace")
KModesResult.__doc__ = """
``assignment``: 0-based cluster of every row; ``modes``: K x H binary modes; ``cost``: total simple matching
dissimilarity; ``n_iter``: number of sweeps; ``cost_trace``: cost after every assignment step.
"""

InitDetails = namedtuple("InitDetails", "params single_level high_kmodes low_kmodes")


def _kmodes_single(patterns, counts, K, rng, max_iter):
    n_patterns = len(patterns)
    first = rng.choice(n_patterns, size=min(K, n_patterns), replace=False, p=counts / counts.sum())
    if K > n_patterns:
        first = np.concatenate([first, rng.choice(n_patterns, size=K - n_patterns, replace=True)])
    modes = patterns[first].copy()

    assignment = None
    cost_trace = []
    for sweep in range(max_iter):
        distance = (patterns[:, None, :] != modes[None, :, :]).sum(axis=2)
        new_assignment = distance.argmin(axis=1)
        cost_trace.append(int(np.dot(counts, distance[np.arange(n_patterns), new_assignment])))
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for k in range(K):
            members = assignment == k
            if members.any():
                share = counts[members].dot(patterns[members]) / counts[members].sum()
                modes[k] = (share >= 0.5).astype(modes.dtype)
    return new_assignment, modes, cost_trace


def kmodes(Y, K, seed=None, max_iter=defaults.KMODES_MAX_ITER, n_init=defaults.KMODES_N_INIT):
    """
    Lloyd style K-modes clustering of binary rows with the simple matching (Hamming) dissimilarity. Rows are
    assigned to the nearest mode (ties to the lowest cluster index) and modes are updated to the column-wise
    majority of their members (ties to 1). The restart with the lowest cost is kept.

    The computation runs on the distinct response patterns weighted by their frequency.

    :param Y: N x H binary matrix
    :type Y: numpy.ndarray
    :param K: number of clusters
    :type K: int
    :param seed: seed of the random mode initialisation
    :type seed: int
    :param max_iter: maximal number of sweeps per restart
    :type max_iter: int
    :param n_init: number of restarts
    :type n_init: int

    :return: the clustering
    :rtype: KModesResult
    """
    K = int(K)
    if K < 1:
        raise ValueError("K must be at least 1, got {}".format(K))
    Y = np.asarray(Y).astype(np.int8)
    patterns, inverse, counts = np.unique(Y, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    if K > len(patterns):
        _logger.warning("K-modes with K=%d on %d distinct rows: duplicate modes", K, len(patterns))

    best = None
    for restart in range(n_init):
        assignment, modes, cost_trace = _kmodes_single(patterns, counts, K, derive_rng(seed, restart), max_iter)
        if best is None or cost_trace[-1] < best[2][-1]:
            best = (assignment, modes, cost_trace)

    assignment, modes, cost_trace = best
    return KModesResult(assignment=assignment[inverse], modes=modes, cost=cost_trace[-1], n_iter=len(cost_trace),
                        cost_trace=tuple(cost_trace))


def class_order(phi):
    """
    Order of the low-level classes by decreasing mean item probability. Keys closer than ``TIE_TOL`` keep their
    current order and a warning is logged.

    :param phi: H x T item probabilities
    :type phi: numpy.ndarray

    :return: the permutation (new class t is old class ``order[t]``) and a tie flag
    :rtype: tuple
    """
    means = np.asarray(phi).mean(axis=0)
    tie = [False]

    def compare(a, b):
        if abs(means[a] - means[b]) < defaults.TIE_TOL:
            tie[0] = True
            return 0
        return -1 if means[a] > means[b] else 1

    order = np.array(sorted(range(len(means)), key=cmp_to_key(compare)), dtype=int)
    if tie[0]:
        _logger.warning("Low-level classes with (almost) equal mean item probabilities, their order is kept")
    return order, tie[0]


def reorder_classes(params):
    """
    Relabels the low-level classes by decreasing mean of the Phi columns; Pi columns and Gamma blocks follow.

    :param params: the parameters
    :type params: pai_mlca.model.core.ModelParams

    :return: the relabelled parameters
    :rtype: pai_mlca.model.core.ModelParams
    """
    order, _ = class_order(params.phi)
    if np.array_equal(order, np.arange(params.T)):
        return params
    if params.K == 1:
        return ModelParams(MeasurementParams(params.phi[:, order]),
                           StructuralParams(params.omega, pi=params.pi[:, order]))
    return relabel_params(params, low_perm=order)


def _smoothed_profiles(Y, assignment, T):
    onehot = np.eye(T)[assignment]
    counts = onehot.sum(axis=0)
    phi = (Y.T.dot(onehot) + 1.) / (counts + 2.)
    shares = (counts + 1.) / (counts.sum() + T)
    return phi, shares


def _modal_group_class(dataset, assignment, M):
    per_group = np.zeros((dataset.J, M))
    np.add.at(per_group, (dataset.group_index, assignment), 1)
    return per_group.argmax(axis=1)


def _single_start_control(ctrl, seed):
    if ctrl is None:
        return EmControl(n_starts=0, seed=seed)
    return EmControl(ctrl.max_iter, ctrl.tol, 0, seed)


def hierarchical_start(dataset, dims, seed=None, ctrl=None):
    """
    :func:`hierarchical_init` with the intermediate results (single-level fit and both K-modes clusterings).
    The single-level fit runs with the iteration limit and tolerance of ``ctrl`` from one start.

    :rtype: InitDetails
    """
    T, M = dims.T, dims.M

    high_kmodes = kmodes(dataset.Y, M, seed=derive_seed(seed, 2, 0))
    group_class = _modal_group_class(dataset, high_kmodes.assignment, M)
    frequencies = np.bincount(group_class, minlength=M) / dataset.J
    if np.any(frequencies == 0):
        _logger.warning("Empty high-level class after K-modes, starting from uniform omega")
        omega = np.full(M, 1. / M)
    else:
        order = np.argsort(-frequencies, kind="stable")
        relabel = np.empty(M, dtype=int)
        relabel[order] = np.arange(M)
        group_class = relabel[group_class]
        omega = frequencies[order]

    low_kmodes = kmodes(dataset.Y, T, seed=derive_seed(seed, 2, 1))
    phi, shares = _smoothed_profiles(dataset.Y, low_kmodes.assignment, T)
    single_dims = dims.with_classes(M=1)
    single_level = fit_unconditional(dataset, single_dims,
                                     init=ModelParams.from_arrays(phi, [1.], pi=shares[None, :]),
                                     ctrl=_single_start_control(ctrl, seed))
    unit_class = single_level.posteriors.v[:, :, 0].argmax(axis=1)

    crosstab = np.zeros((M, T))
    np.add.at(crosstab, (group_class[dataset.group_index], unit_class), 1)
    totals = crosstab.sum(axis=1, keepdims=True)
    pi = np.where(totals > 0, crosstab / np.where(totals > 0, totals, 1), 1. / T)

    params = reorder_classes(ModelParams(single_level.params.measurement, StructuralParams(omega, pi=pi)))
    return InitDetails(params, single_level, high_kmodes, low_kmodes)


def hierarchical_init(dataset, dims, seed=None, ctrl=None):
    """
    Starting values for the multilevel EM:

        1. K-modes with M clusters on all rows; every group gets the modal cluster of its units. The relative
           group frequencies, sorted decreasingly, initialise omega.
        2. A pooled single-level latent class model with T classes, started from a K-modes clustering with T
           clusters, gives Phi and the MAP low-level classes.
        3. Pi is the row-normalised cross-tabulation of the high-level by the low-level assignments.
        4. The low-level classes are reordered with :func:`reorder_classes`.

    :param dataset: the data
    :type dataset: pai_mlca.model.core.Dataset
    :param dims: the model dimensions
    :type dims: pai_mlca.model.core.ModelDims
    :param seed: seed of the K-modes restarts
    :type seed: int
    :param ctrl: iteration limit and tolerance of the single-level fit
    :type ctrl: pai_mlca.estimation.em_step1.EmControl

    :return: the starting values
    :rtype: pai_mlca.model.core.ModelParams
    """
    return hierarchical_start(dataset, dims, seed, ctrl).params
