# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Counter based seed derivation. Every random stream of the package is obtained from a master seed and a tuple of
integer keys, so that the streams do not depend on the order in which jobs are executed.
"""

import numpy as np


def derive_seed_sequence(seed, *keys):
    """
    :param seed: the master seed or None for fresh entropy
    :type seed: int or None
    :param keys: integer keys identifying the stream, e.g. (condition, replicate)
    :type keys: int

    :return: a seed sequence
    :rtype: numpy.random.SeedSequence
    """
    if seed is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence([int(seed)] + [int(k) for k in keys])


def derive_rng(seed, *keys):
    """
    Random generator for the stream (seed, keys...).

    :rtype: numpy.random.Generator
    """
    return np.random.default_rng(derive_seed_sequence(seed, *keys))


def derive_seed(seed, *keys):
    """
    A plain integer seed for the stream (seed, keys...), or None when ``seed`` is None.

    :rtype: int or None
    """
    if seed is None:
        return None
    return int(derive_seed_sequence(seed, *keys).generate_state(1)[0])
