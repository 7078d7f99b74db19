"""
At the top level we export the estimators, the class number selection and the data container:

    * :func:`~pai_mlca.estimation.estimators.fit_two_step`
    * :func:`~pai_mlca.estimation.estimators.fit_one_step`
    * :func:`~pai_mlca.estimation.estimators.fit_two_stage`
    * :func:`~pai_mlca.selection.selection.hierarchical_select`
    * :class:`~pai_mlca.model.core.Dataset`
"""


import pkg_resources


try:
    __version__ = pkg_resources.get_distribution(__name__).version
except pkg_resources.DistributionNotFound:
    __version__ = 'unknown'


# Set default logging handler to avoid "No handler found" warnings.
import logging
from logging import NullHandler

logging.getLogger(__name__).addHandler(NullHandler())


from pai_mlca.model.core import Dataset
from pai_mlca.estimation.estimators import fit_two_step, fit_one_step, fit_two_stage
from pai_mlca.selection.selection import hierarchical_select
