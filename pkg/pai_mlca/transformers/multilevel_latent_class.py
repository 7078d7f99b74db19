# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from pai_mlca import defaults
from pai_mlca.estimation.em_step1 import EmControl
from pai_mlca.estimation.estimators import TWO_STEP, fit
from pai_mlca.model.core import Dataset
from pai_mlca.model.posterior import CONDITIONAL, e_step


class MultilevelLatentClass(BaseEstimator):
    """
    Sklearn-compatible estimator for the multilevel latent class model with covariates. It is basically a wrapper
    around :func:`~pai_mlca.estimation.estimators.fit`.

    The rows of ``X`` are units with binary item responses, ``groups`` holds the group of every unit and ``Z`` the
    unit covariates (without the intercept, which is always added):

    >>> from pai_mlca.transformers import MultilevelLatentClass
    >>> model = MultilevelLatentClass(n_low_classes=3, n_high_classes=2, random_state=1)
    >>> model.fit(X, groups=groups, Z=Z)
    >>> model.predict(X, groups=groups, Z=Z)

    After the fit the estimates are available as ``result_`` (a
    :class:`~pai_mlca.estimation.estimators.FitResult`).
    """

    def __init__(self, n_low_classes=2, n_high_classes=1, method=TWO_STEP, max_iter=defaults.EM_MAX_ITER,
                 tol=defaults.EM_TOL, n_starts=defaults.N_STARTS, random_state=None, n_jobs=0):
        """
        :param n_low_classes: number of low-level (unit) classes T
        :type n_low_classes: int
        :param n_high_classes: number of high-level (group) classes M
        :type n_high_classes: int
        :param method: "two_step", "one_step" or "two_stage"
        :type method: str
        :param max_iter: maximal number of EM iterations
        :type max_iter: int
        :param tol: threshold of the relative log-likelihood change
        :type tol: float
        :param n_starts: number of random EM starts
        :type n_starts: int
        :param random_state: seed of all random streams
        :type random_state: int
        :param n_jobs: number of processes for the EM starts, 0 runs serially
        :type n_jobs: int
        """
        self.n_low_classes = n_low_classes
        self.n_high_classes = n_high_classes
        self.method = method
        self.max_iter = max_iter
        self.tol = tol
        self.n_starts = n_starts
        self.random_state = random_state
        self.n_jobs = n_jobs

    @staticmethod
    def _dataset(X, groups, Z):
        if groups is None:
            raise ValueError("The group of every row is needed")
        X = np.asarray(X, dtype=float)
        design = np.ones((X.shape[0], 1))
        if Z is not None:
            Z = np.asarray(Z, dtype=float)
            design = np.column_stack([design, Z.reshape(X.shape[0], -1)])
        return Dataset(X, np.asarray(groups), design)

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError("This MultilevelLatentClass instance is not fitted yet, call fit first.")

    def fit(self, X, y=None, groups=None, Z=None):
        """
        Fits the model.

        :param X: N x H binary item responses
        :type X: numpy.ndarray or pandas.DataFrame
        :param y: ignored
        :param groups: group of every row
        :type groups: array-like
        :param Z: N x (K - 1) covariates, may be None
        :type Z: array-like

        :return: the fitted estimator
        :rtype: MultilevelLatentClass
        """
        dataset = self._dataset(X, groups, Z)
        ctrl = EmControl(self.max_iter, self.tol, self.n_starts, self.random_state)
        self.result_ = fit(dataset, dataset.dims(self.n_low_classes, self.n_high_classes), self.method, ctrl=ctrl,
                           n_jobs=self.n_jobs)
        self.params_ = self.result_.params
        return self

    def _posteriors(self, X, groups, Z):
        self._check_fitted()
        dataset = self._dataset(X, groups, Z)
        return dataset, e_step(dataset, self.params_, CONDITIONAL)

    def predict_proba(self, X, groups=None, Z=None):
        """
        Posterior low-level class probabilities of every row, in the row order of ``X``.

        :rtype: numpy.ndarray
        """
        dataset, post = self._posteriors(X, groups, Z)
        proba = np.empty((dataset.N, self.params_.T))
        proba[dataset.permutation] = post.v.sum(axis=2)
        return proba

    def predict(self, X, groups=None, Z=None):
        """
        MAP low-level class (0-based) of every row.
        """
        return self.predict_proba(X, groups, Z).argmax(axis=1)

    def predict_groups(self, X, groups=None, Z=None):
        """
        MAP high-level class (0-based) of every group.

        :rtype: pandas.Series
        """
        dataset, post = self._posteriors(X, groups, Z)
        return pd.Series(post.u.argmax(axis=1), index=pd.Index(dataset.group_labels, name="group"))

    def score(self, X, y=None, groups=None, Z=None):
        """
        Average log-likelihood per unit.
        """
        dataset, post = self._posteriors(X, groups, Z)
        return post.loglik / dataset.N
