# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Exceptions raised when an estimation breaks down numerically. Invalid user input is reported with the builtin
``ValueError`` instead.
"""


class NumericalError(RuntimeError):
    """
    A computation produced a non-finite value or a system that could not be solved.
    """
    pass


class DegenerateClassError(NumericalError):
    """
    A latent class lost (almost) all of its posterior mass during an M-step.

    :param level: either "low" or "high"
    :type level: str
    :param index: 0-based index of the offending class
    :type index: int
    """

    def __init__(self, level, index):
        self.level = level
        self.index = index
        super(DegenerateClassError, self).__init__(
            "degenerate class: {}-level class {} has no posterior mass".format(level, index + 1))
