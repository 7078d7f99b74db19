# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Data model of the multilevel latent class model with covariates.

Every unit ``i`` of group ``j`` belongs to a low-level class ``X_ij`` in ``0..T-1`` and every group belongs to a
high-level class ``W_j`` in ``0..M-1``. The model is made of

    * the measurement part ``phi[h, t] = P(Y_ijh = 1 | X_ij = t)`` (:class:`MeasurementParams`),
    * the structural part ``omega[m] = P(W_j = m)`` and the multinomial logit
      ``P(X_ij = t | W_j = m, Z_ij) ~ exp(Z_ij . gamma[m, t - 1])`` with class 0 as reference
      (:class:`StructuralParams`).

All parameter objects are immutable after construction, their arrays are flagged read-only.
"""

from __future__ import absolute_import, division

import logging
from collections import namedtuple

import numpy as np
import pandas as pd
from scipy.special import expit, logit, logsumexp, softmax

from pai_mlca import defaults

_logger = logging.getLogger(__name__)


def _frozen(array):
    array.setflags(write=False)
    return array


def _clamp_simplex(p, axis=-1):
    p = np.clip(p, defaults.EPSILON, None)
    return p / p.sum(axis=axis, keepdims=True)


def _check_simplex(p, name, axis=-1):
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("{} must contain finite non-negative probabilities".format(name))
    if not np.allclose(p.sum(axis=axis), 1., atol=1e-6):
        raise ValueError("{} must sum to one".format(name))


def numerical_rank(matrix, tol=defaults.RANK_TOL):
    """
    Number of singular values larger than ``tol`` times the largest one.

    :param matrix: any 2-D array
    :type matrix: numpy.ndarray
    :param tol: relative threshold
    :type tol: float

    :return: the numerical rank
    :rtype: int
    """
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


class ModelDims(namedtuple("ModelDims", "J n H T M K")):
    """
    Index structure of a multilevel latent class model: ``J`` groups with ``n[j]`` units each, ``H`` binary items,
    ``T`` low-level classes, ``M`` high-level classes and ``K`` covariate columns (intercept included).
    """
    __slots__ = ()

    def __new__(cls, J, n, H, T, M, K=1):
        J, H, T, M, K = int(J), int(H), int(T), int(M), int(K)
        n = tuple(int(x) for x in n)
        if J < 1:
            raise ValueError("J must be at least 1, got {}".format(J))
        if len(n) != J:
            raise ValueError("Expected {} group sizes, got {}".format(J, len(n)))
        if any(x < 1 for x in n):
            raise ValueError("Every group needs at least one unit")
        for name, value in (("H", H), ("T", T), ("M", M), ("K", K)):
            if value < 1:
                raise ValueError("{} must be at least 1, got {}".format(name, value))
        return super(ModelDims, cls).__new__(cls, J, n, H, T, M, K)

    @property
    def N(self):
        return int(sum(self.n))

    @property
    def n_structural(self):
        """Length of the structural vector (alpha, vec Gamma)."""
        return self.M - 1 + self.M * (self.T - 1) * self.K

    @property
    def npar_unconditional(self):
        return self.M - 1 + self.M * (self.T - 1) + self.H * self.T

    @property
    def npar_conditional(self):
        return self.n_structural + self.H * self.T

    def with_classes(self, T=None, M=None, K=None):
        return ModelDims(self.J, self.n, self.H,
                         self.T if T is None else T,
                         self.M if M is None else M,
                         self.K if K is None else K)


class Dataset(object):
    """
    Binary item responses of units nested in groups, together with the covariate design matrix.

    The rows are stored as contiguous group blocks: the constructor sorts the rows stably by group and keeps the
    applied ``permutation`` (row ``r`` of the stored data is row ``permutation[r]`` of the input).

    :param Y: N x H matrix of 0/1 responses
    :type Y: array-like
    :param group: group label of each row, any sortable labels
    :type group: array-like
    :param Z: N x K design matrix whose first column is the constant 1. Defaults to the intercept only.
    :type Z: array-like or None
    :param item_names: names of the H items
    :type item_names: list of str
    :param covariate_names: names of the K design columns
    :type covariate_names: list of str
    """

    def __init__(self, Y, group, Z=None, item_names=None, covariate_names=None):
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2:
            raise ValueError("Y must be a two dimensional matrix")
        N, H = Y.shape
        if N == 0 or H == 0:
            raise ValueError("Y must contain at least one row and one item")
        if np.isnan(Y).any():
            i, h = np.argwhere(np.isnan(Y))[0]
            raise ValueError("Missing item response in row {} column {}; missing data is not supported".format(i, h))
        not_binary = (Y != 0) & (Y != 1)
        if not_binary.any():
            i, h = np.argwhere(not_binary)[0]
            raise ValueError("Item responses must be 0 or 1, found {} in row {} column {}".format(Y[i, h], i, h))

        group = np.asarray(group)
        if group.ndim != 1 or len(group) != N:
            raise ValueError("group must be a vector with one entry per row of Y")
        if pd.isnull(group).any():
            raise ValueError("group must not contain missing values")
        labels, codes = np.unique(group, return_inverse=True)
        codes = codes.reshape(-1)

        if Z is None:
            Z = np.ones((N, 1))
        Z = np.asarray(Z, dtype=float)
        if Z.ndim == 1:
            Z = Z[:, None]
        if Z.ndim != 2 or Z.shape[0] != N:
            raise ValueError("Z must have one row per row of Y")
        if not np.all(np.isfinite(Z)):
            raise ValueError("Z must not contain missing or infinite values")
        if not np.all(Z[:, 0] == 1):
            raise ValueError("The first column of Z must be the constant 1")

        order = np.argsort(codes, kind="stable")
        self._Y = _frozen(Y[order])
        self._Z = _frozen(Z[order])
        self._group_index = _frozen(codes[order])
        self.permutation = _frozen(order)
        self.group_labels = labels
        self.sizes = _frozen(np.bincount(codes, minlength=len(labels)))
        self.offsets = _frozen(np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(int))

        self.item_names = list(item_names) if item_names is not None else ["y{}".format(h + 1) for h in range(H)]
        if len(self.item_names) != H:
            raise ValueError("Expected {} item names".format(H))
        K = Z.shape[1]
        if covariate_names is None:
            covariate_names = ["intercept"] + ["z{}".format(k) for k in range(1, K)]
        self.covariate_names = list(covariate_names)
        if len(self.covariate_names) != K:
            raise ValueError("Expected {} covariate names".format(K))

    @property
    def Y(self):
        return self._Y

    @property
    def Z(self):
        return self._Z

    @property
    def group_index(self):
        """0-based group code of every (sorted) row."""
        return self._group_index

    @property
    def N(self):
        return self._Y.shape[0]

    @property
    def H(self):
        return self._Y.shape[1]

    @property
    def K(self):
        return self._Z.shape[1]

    @property
    def J(self):
        return len(self.sizes)

    def dims(self, T, M):
        return ModelDims(self.J, self.sizes, self.H, T, M, self.K)

    def has_full_rank_design(self):
        return numerical_rank(self._Z) == self.K

    def __repr__(self):
        return "Dataset(J={}, N={}, H={}, K={})".format(self.J, self.N, self.H, self.K)


class MeasurementParams(object):
    """
    H x T matrix of item probabilities ``phi[h, t]``, clamped into ``[EPSILON, 1 - EPSILON]``.
    """

    def __init__(self, phi):
        phi = np.array(phi, dtype=float)
        if phi.ndim != 2:
            raise ValueError("phi must be an H x T matrix")
        if not np.all(np.isfinite(phi)) or np.any(phi < 0) or np.any(phi > 1):
            raise ValueError("phi must contain probabilities")
        self.phi = _frozen(np.clip(phi, defaults.EPSILON, 1 - defaults.EPSILON))

    @property
    def H(self):
        return self.phi.shape[0]

    @property
    def T(self):
        return self.phi.shape[1]


class StructuralParams(object):
    """
    High-level mixing proportions ``omega`` together with either the class probabilities ``pi`` (M x T) of the
    unconditional model or the logit coefficients ``gamma`` (M x (T-1) x K) of the covariate model.

    Both views are always available: ``gamma`` derived from ``pi`` has the single intercept column
    ``log(pi[m, t] / pi[m, 0])`` and ``pi`` derived from ``gamma`` is the class distribution at ``Z = 0``, i.e.
    the softmax of the intercepts.
    """

    def __init__(self, omega, pi=None, gamma=None):
        omega = np.array(omega, dtype=float).reshape(-1)
        if omega.size < 1:
            raise ValueError("omega needs at least one class")
        _check_simplex(omega, "omega")
        self.omega = _frozen(_clamp_simplex(omega))
        M = omega.size

        if gamma is not None:
            gamma = np.array(gamma, dtype=float)
            if gamma.ndim != 3 or gamma.shape[0] != M:
                raise ValueError("gamma must have shape (M, T - 1, K) with M = {}".format(M))
            if not np.all(np.isfinite(gamma)):
                raise ValueError("gamma must be finite")
            intercepts = np.hstack([np.zeros((M, 1)), gamma[:, :, 0]])
            pi = _clamp_simplex(softmax(intercepts, axis=1), axis=1)
        elif pi is not None:
            pi = np.array(pi, dtype=float)
            if pi.ndim != 2 or pi.shape[0] != M:
                raise ValueError("pi must be an M x T matrix with M = {}".format(M))
            _check_simplex(pi, "each row of pi", axis=1)
            pi = _clamp_simplex(pi, axis=1)
            gamma = (np.log(pi[:, 1:]) - np.log(pi[:, :1]))[:, :, None]
        else:
            raise ValueError("Either pi or gamma is needed")

        self.pi = _frozen(pi)
        self.gamma = _frozen(gamma)

    @property
    def M(self):
        return self.omega.size

    @property
    def T(self):
        return self.pi.shape[1]

    @property
    def K(self):
        return self.gamma.shape[2]


class ModelParams(namedtuple("ModelParams", "measurement structural")):
    """
    Complete parameter set of a multilevel latent class model.
    """
    __slots__ = ()

    def __new__(cls, measurement, structural):
        if measurement.T != structural.T:
            raise ValueError("phi has {} classes but pi has {}".format(measurement.T, structural.T))
        return super(ModelParams, cls).__new__(cls, measurement, structural)

    @classmethod
    def from_arrays(cls, phi, omega, pi=None, gamma=None):
        return cls(MeasurementParams(phi), StructuralParams(omega, pi=pi, gamma=gamma))

    phi = property(lambda self: self.measurement.phi)
    omega = property(lambda self: self.structural.omega)
    pi = property(lambda self: self.structural.pi)
    gamma = property(lambda self: self.structural.gamma)
    H = property(lambda self: self.measurement.H)
    T = property(lambda self: self.measurement.T)
    M = property(lambda self: self.structural.M)
    K = property(lambda self: self.structural.K)

    def replace_measurement(self, measurement):
        return ModelParams(measurement, self.structural)

    def replace_structural(self, structural):
        return ModelParams(self.measurement, structural)


LogLinearParams = namedtuple("LogLinearParams", "alpha gamma beta clamped")
LogLinearParams.__doc__ = """
Log-linear coordinates of the unconditional model: ``alpha[m-1] = log(omega[m] / omega[0])``,
``gamma[t-1, m] = log(pi[m, t] / pi[m, 0])`` and ``beta = logit(phi)``. ``clamped`` flags boundary probabilities.
"""


def to_loglinear(params):
    """
    Maps (omega, Pi, Phi) to log-odds coordinates with class 0 and item value 0 as references.

    Probabilities on the boundary are clamped into ``[EPSILON, 1 - EPSILON]``; this is reported by a warning and by
    the ``clamped`` flag of the result, never by an exception.

    :param params: the parameters to transform
    :type params: ModelParams

    :return: the log-linear parameters
    :rtype: LogLinearParams
    """
    measurement, structural = params
    eps = defaults.EPSILON

    def on_boundary(p):
        return bool(np.any(p <= eps) or np.any(p >= 1 - eps))

    clamped = on_boundary(measurement.phi)
    if structural.M > 1:
        clamped = clamped or on_boundary(structural.omega)
    if structural.T > 1:
        clamped = clamped or on_boundary(structural.pi)
    if clamped:
        _logger.warning("Boundary probabilities were clamped to [%g, %g] before taking log-odds", eps, 1 - eps)

    omega, pi = structural.omega, structural.pi
    alpha = np.log(omega[1:]) - np.log(omega[0])
    gamma = (np.log(pi[:, 1:]) - np.log(pi[:, :1])).T
    beta = logit(np.clip(measurement.phi, eps, 1 - eps))
    return LogLinearParams(alpha, gamma, beta, clamped)


def from_loglinear(ll):
    """
    Inverse of :func:`to_loglinear`: softmax for omega and the rows of Pi, inverse logit for Phi.

    :param ll: log-linear parameters; ``ll.gamma`` has shape (T-1) x M
    :type ll: LogLinearParams

    :return: the probability parameters
    :rtype: ModelParams
    """
    alpha = np.atleast_1d(np.asarray(ll.alpha, dtype=float))
    beta = np.asarray(ll.beta, dtype=float)
    M = alpha.size + 1
    gamma = np.asarray(ll.gamma, dtype=float).reshape(-1, M)

    omega = softmax(np.concatenate([[0.], alpha]))
    pi = softmax(np.hstack([np.zeros((M, 1)), gamma.T]), axis=1)
    return ModelParams(MeasurementParams(expit(beta)), StructuralParams(omega, pi=pi))


class IdentifiabilityReport(namedtuple("IdentifiabilityReport",
                                       "distinct_items pi_full_rank m_le_t min_group_size z_full_rank")):
    """
    Result of :func:`check_identifiability`. ``z_full_rank`` is None when no design matrix was checked.
    """
    __slots__ = ()

    _messages = (("distinct_items", "item probabilities are not distinct across low-level classes"),
                 ("pi_full_rank", "rank(Pi) < M"),
                 ("m_le_t", "M > T"),
                 ("min_group_size", "some group has fewer than 3 units"),
                 ("z_full_rank", "the design matrix Z does not have full column rank"))

    @property
    def violations(self):
        return [message for field, message in self._messages if getattr(self, field) is False]

    @property
    def ok(self):
        return not self.violations


def check_identifiability(dims, params, Z=None):
    """
    Checks the programmable preconditions for identification of the multilevel latent class model: distinct item
    probabilities across low-level classes for every item, ``rank(Pi) = M``, ``M <= T``, at least 3 units in
    every group and, if ``Z`` is given, a full column rank design.

    The function does not raise; callers decide what to do with the violations.

    :param dims: model dimensions
    :type dims: ModelDims
    :param params: parameters to check
    :type params: ModelParams
    :param Z: optional design matrix
    :type Z: numpy.ndarray

    :return: flags for every condition
    :rtype: IdentifiabilityReport
    """
    phi = params.phi
    if phi.shape[1] > 1:
        gaps = np.abs(phi[:, :, None] - phi[:, None, :])
        off_diagonal = ~np.eye(phi.shape[1], dtype=bool)
        distinct = bool(np.all(gaps[:, off_diagonal] > defaults.DISTINCT_TOL))
    else:
        distinct = True

    z_full_rank = None
    if Z is not None:
        Z = np.asarray(Z, dtype=float)
        z_full_rank = numerical_rank(Z) == Z.shape[1]

    return IdentifiabilityReport(distinct_items=distinct,
                                 pi_full_rank=numerical_rank(params.pi) == dims.M,
                                 m_le_t=dims.M <= dims.T,
                                 min_group_size=min(dims.n) >= defaults.MIN_GROUP_SIZE,
                                 z_full_rank=z_full_rank)


def full_eta(gamma):
    """
    Prepends the zero reference block to gamma: (M, T-1, K) -> (M, T, K).
    """
    M, _, K = gamma.shape
    return np.concatenate([np.zeros((M, 1, K)), gamma], axis=1)


def log_class_probabilities(structural, Z=None):
    """
    ``log P(X_ij = t | W_j = m, Z_ij)`` for every unit.

    :param structural: the structural parameters
    :type structural: StructuralParams
    :param Z: the N x K design matrix; None uses the unconditional ``pi``
    :type Z: numpy.ndarray

    :return: array of shape (N, M, T), or (1, M, T) without covariates
    :rtype: numpy.ndarray
    """
    if Z is None:
        return np.log(structural.pi)[None, :, :]
    if structural.K != Z.shape[1]:
        raise ValueError("gamma has {} covariate columns but Z has {}".format(structural.K, Z.shape[1]))
    eta = np.einsum("nk,mtk->nmt", Z, full_eta(structural.gamma))
    return eta - logsumexp(eta, axis=2, keepdims=True)


def relabel_params(params, low_perm=None, high_perm=None):
    """
    Renames the latent classes: new low-level class ``t`` is old class ``low_perm[t]`` and new high-level class
    ``m`` is old class ``high_perm[m]``. Gamma is re-expressed against the new reference class.

    :rtype: ModelParams
    """
    low = np.arange(params.T) if low_perm is None else np.asarray(low_perm, dtype=int)
    high = np.arange(params.M) if high_perm is None else np.asarray(high_perm, dtype=int)
    if sorted(low) != list(range(params.T)) or sorted(high) != list(range(params.M)):
        raise ValueError("Class relabelling must be a permutation")

    eta = full_eta(params.gamma)[high][:, low, :]
    gamma = eta[:, 1:, :] - eta[:, :1, :]
    return ModelParams(MeasurementParams(params.phi[:, low]),
                       StructuralParams(params.omega[high], gamma=gamma))


def structural_vector(structural):
    """
    The structural parameters as one vector ``(alpha_1..alpha_{M-1}, vec Gamma)``, Gamma flattened by (m, t, k).
    """
    omega = structural.omega
    alpha = np.log(omega[1:]) - np.log(omega[0])
    return np.concatenate([alpha, structural.gamma.ravel()])


def structural_from_vector(theta, M, T, K):
    theta = np.asarray(theta, dtype=float)
    if theta.size != M - 1 + M * (T - 1) * K:
        raise ValueError("Structural vector has the wrong length")
    omega = softmax(np.concatenate([[0.], theta[:M - 1]]))
    return StructuralParams(omega, gamma=theta[M - 1:].reshape(M, T - 1, K))


def measurement_vector(measurement):
    """logit(phi) flattened by (t, h)."""
    return logit(measurement.phi).T.ravel()


def measurement_from_vector(beta, H, T):
    return MeasurementParams(expit(np.asarray(beta, dtype=float).reshape(T, H).T))
