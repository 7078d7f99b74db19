from itertools import product
from unittest import TestCase

import numpy as np

from pai_mlca.examples.multilevel_simulation import condition, generate
from pai_mlca.model.core import Dataset, ModelParams


def brute_force_posteriors(dataset, params, conditional):
    """
    Posteriors and log-likelihood by enumerating every configuration (W_j, X_1j, ..., X_nj) of every group.
    """
    Y, Z = dataset.Y, dataset.Z
    phi, omega, gamma = params.phi, params.omega, params.gamma
    N, T, M = dataset.N, params.T, params.M

    f = np.array([[np.prod(np.where(Y[i] == 1, phi[:, t], 1 - phi[:, t])) for t in range(T)] for i in range(N)])
    pi = np.empty((N, M, T))
    for i in range(N):
        for m in range(M):
            if conditional:
                eta = np.concatenate([[0.], gamma[m].dot(Z[i])])
                pi[i, m] = np.exp(eta) / np.exp(eta).sum()
            else:
                pi[i, m] = params.pi[m]

    u = np.zeros((dataset.J, M))
    v = np.zeros((N, T, M))
    loglik = 0.
    for j in range(dataset.J):
        rows = np.flatnonzero(dataset.group_index == j)
        joint = {}
        for m in range(M):
            for xs in product(range(T), repeat=len(rows)):
                joint[(m, xs)] = omega[m] * np.prod([pi[i, m, x] * f[i, x] for i, x in zip(rows, xs)])
        total = sum(joint.values())
        loglik += np.log(total)
        for (m, xs), p in joint.items():
            u[j, m] += p / total
            for i, x in zip(rows, xs):
                v[i, x, m] += p / total
    return u, v, loglik


class DataTestCase(TestCase):

    def create_toy_params(self):
        phi = [[0.9, 0.2], [0.8, 0.1], [0.7, 0.3]]
        return ModelParams.from_arrays(phi, [0.6, 0.4], pi=[[0.7, 0.3], [0.2, 0.8]])

    def create_covariate_params(self):
        phi = [[0.9, 0.5, 0.1], [0.8, 0.6, 0.2], [0.85, 0.3, 0.15], [0.7, 0.8, 0.1]]
        gamma = [[[-0.5, 0.4], [-1.0, -0.3]],
                 [[0.7, -0.2], [0.3, 0.5]]]
        return ModelParams.from_arrays(phi, [0.55, 0.45], gamma=gamma)

    def create_random_instance(self, rng, J=3, max_n=4, H=3, T=2, M=2, K=1):
        """
        Random responses and random interior parameters; group sizes between 1 and ``max_n``.
        """
        sizes = rng.integers(1, max_n + 1, size=J)
        group = np.repeat(np.arange(J), sizes)
        N = int(sizes.sum())
        Y = rng.integers(0, 2, size=(N, H))
        Z = np.column_stack([np.ones(N), rng.standard_normal((N, K - 1))])
        params = ModelParams.from_arrays(rng.uniform(0.1, 0.9, size=(H, T)), rng.dirichlet(np.ones(M)),
                                         gamma=rng.normal(0, 1, size=(M, T - 1, K)))
        return Dataset(Y, group, Z), params

    def create_simulated_dataset(self, cid=36, J=20, n_low=50, seed=1, **overrides):
        return generate(condition(cid, J=J, n_low=n_low, **overrides), seed=seed)

    def create_csv_string(self):
        return ("id,y1,y2,gender,books\n"
                "1,1,0,0,2.5\n"
                "2,0,0,1,1.0\n"
                "1,1,1,1,3.0\n"
                "2,0,1,0,0.5\n"
                "1,0,1,0,1.5\n"
                "2,1,1,1,2.0\n")
