# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Distributors run independent estimation jobs (random starts of an EM run, cells of a model selection grid,
Monte Carlo replicates) on a number of workers.

Every distributor returns the results in the order of the submitted jobs, so any reduction over them happens in a
fixed order whatever the number of workers.
"""

import itertools
import logging
import math

from functools import partial
from multiprocessing import Pool
from tqdm import tqdm

_logger = logging.getLogger(__name__)


def _run_chunk(jobs, map_function, kwargs):
    """
    Runs ``map_function`` on every job of a chunk and concatenates the returned lists.

    :param jobs: the jobs of one chunk
    :type jobs: list
    :param map_function: called on a single job, it has to return a list
    :type map_function: callable
    :param kwargs: keyword arguments of ``map_function``
    :type kwargs: dict

    :rtype: list
    """
    kwargs = kwargs or {}
    return list(itertools.chain.from_iterable(map_function(job, **kwargs) for job in jobs))


class DistributorBaseClass:
    """
    Base class of the distributors. :meth:`map_reduce` cuts the jobs into chunks, hands the chunks to
    :meth:`distribute` and flattens the per-chunk results into one list.
    """

    @staticmethod
    def partition(data, chunk_size):
        """
        Yields consecutive slices of ``data`` with ``chunk_size`` elements; the last one may be shorter.

        :type data: iterable
        :type chunk_size: int
        :rtype: generator
        """
        iterable = iter(data)
        chunk = list(itertools.islice(iterable, chunk_size))
        while chunk:
            yield chunk
            chunk = list(itertools.islice(iterable, chunk_size))

    def __init__(self):
        raise NotImplementedError

    def calculate_best_chunk_size(self, data_length):
        """
        About five chunks per worker.

        :param data_length: number of jobs
        :type data_length: int
        :rtype: int
        """
        return max(1, int(math.ceil(data_length / float(self.n_workers * 5))))

    def map_reduce(self, map_function, data, function_kwargs=None, chunk_size=None, data_length=None):
        """
        Applies ``map_function`` to every job and returns the concatenated results in job order.

        :param map_function: called on a single job, it has to return a list
        :type map_function: callable
        :param data: the jobs
        :type data: iterable
        :param function_kwargs: keyword arguments of ``map_function``, e.g. the data set and the EM settings
        :type function_kwargs: dict
        :param chunk_size: jobs per chunk, by default :meth:`calculate_best_chunk_size`
        :type chunk_size: int
        :param data_length: number of jobs, needed if ``data`` is a generator
        :type data_length: int

        :rtype: list
        """
        if data_length is None:
            data_length = len(data)
        chunk_size = chunk_size or self.calculate_best_chunk_size(data_length)

        chunks = self.partition(data, chunk_size=chunk_size)
        results = self.distribute(_run_chunk, chunks, {"map_function": map_function, "kwargs": function_kwargs})
        if hasattr(self, "progressbar_title"):
            results = tqdm(results, total=int(math.ceil(data_length / float(chunk_size))),
                           desc=self.progressbar_title, disable=self.disable_progressbar)
        return list(itertools.chain.from_iterable(results))

    def distribute(self, func, partitioned_chunks, kwargs):
        """
        Evaluates ``func(chunk, **kwargs)`` for every chunk. Implemented by the subclasses.

        :return: the per-chunk results in the order of the chunks
        :rtype: iterable
        """
        raise NotImplementedError

    def close(self):
        """
        Releases the workers.
        """
        pass


class MapDistributor(DistributorBaseClass):
    """
    Runs the jobs one after the other in the calling process.
    """

    def __init__(self, disable_progressbar=False, progressbar_title="Estimation"):
        self.disable_progressbar = disable_progressbar
        self.progressbar_title = progressbar_title

    def distribute(self, func, partitioned_chunks, kwargs):
        return map(partial(func, **kwargs), partitioned_chunks)

    def calculate_best_chunk_size(self, data_length):
        return 1


class LocalDaskDistributor(DistributorBaseClass):
    """
    Runs the jobs on a local dask cluster with in-process workers.
    """

    def __init__(self, n_workers):
        """
        :param n_workers: number of dask workers
        :type n_workers: int
        """
        from distributed import LocalCluster, Client
        import tempfile

        # the workers spill to this directory
        self.local_dir_ = tempfile.mkdtemp()
        cluster = LocalCluster(n_workers=n_workers, processes=False, local_directory=self.local_dir_)

        self.client = Client(cluster)
        self.n_workers = n_workers
        _logger.info("Started a local dask cluster with %d workers", n_workers)

    def distribute(self, func, partitioned_chunks, kwargs):
        # gather returns the futures' results in submission order
        return self.client.gather(self.client.map(partial(func, **kwargs), list(partitioned_chunks)))

    def close(self):
        self.client.close()


class MultiprocessingDistributor(DistributorBaseClass):
    """
    Runs the jobs on a pool of local processes.
    """

    def __init__(self, n_workers, disable_progressbar=False, progressbar_title="Estimation"):
        """
        :param n_workers: number of processes
        :type n_workers: int
        :param disable_progressbar: hide the progress bar
        :type disable_progressbar: bool
        :param progressbar_title: title of the progress bar
        :type progressbar_title: str
        """
        self.pool = Pool(processes=n_workers)
        self.n_workers = n_workers
        self.disable_progressbar = disable_progressbar
        self.progressbar_title = progressbar_title

    def distribute(self, func, partitioned_chunks, kwargs):
        # imap (not imap_unordered): results arrive in submission order
        return self.pool.imap(partial(func, **kwargs), partitioned_chunks)

    def close(self):
        self.pool.close()
        self.pool.terminate()
        self.pool.join()


def get_distributor(n_jobs, distributor=None, disable_progressbar=True, progressbar_title="Estimation"):
    """
    The distributor for a call with ``n_jobs`` workers and whether the caller owns it (and has to close it).

    :param n_jobs: number of processes, 0 runs the jobs serially
    :type n_jobs: int
    :param distributor: Advanced parameter: an already set up distributor, which stays owned by the caller.
    :type distributor: DistributorBaseClass

    :rtype: tuple
    """
    if distributor is not None:
        if not isinstance(distributor, DistributorBaseClass):
            raise ValueError("the passed distributor is not an DistributorBaseClass object")
        return distributor, False

    if n_jobs == 0:
        return MapDistributor(disable_progressbar=disable_progressbar, progressbar_title=progressbar_title), True
    return MultiprocessingDistributor(n_workers=n_jobs, disable_progressbar=disable_progressbar,
                                      progressbar_title=progressbar_title), True
