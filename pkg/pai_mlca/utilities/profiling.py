# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
cProfile helpers behind the ``--profile`` flag of the command line interface.
"""

import cProfile
import logging
import pstats

import six

_logger = logging.getLogger(__name__)


def start_profiling():
    """
    Starts a profiler; hand it to :func:`end_profiling` when the estimation is done.

    >>> profiler = start_profiling()
    >>> result = fit_two_step(dataset, dims)
    >>> end_profiling(profiler, "profile.txt", "cumulative")

    :rtype: cProfile.Profile
    """
    profiler = cProfile.Profile()
    profiler.enable()
    return profiler


def end_profiling(profiler, filename, sorting=None):
    """
    Stops ``profiler`` and writes its statistics to ``filename``.

    :param profiler: a profiler from :func:`start_profiling`
    :type profiler: cProfile.Profile
    :param filename: the output file
    :type filename: str
    :param sorting: key of ``pstats.Stats.sort_stats``, e.g. "cumulative"; unsorted if None
    :type sorting: str
    """
    profiler.disable()
    buffer = six.StringIO()
    stats = pstats.Stats(profiler, stream=buffer)
    if sorting:
        stats.sort_stats(sorting)
    stats.print_stats()

    with open(filename, "w+") as f:
        f.write(buffer.getvalue())
    _logger.info("Wrote the profile of the run to %s", filename)
