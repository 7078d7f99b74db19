"""
The :mod:`~pai_mlca.estimation` module contains the EM algorithms, their starting values, the standard error
computations and the three estimators built from them.
"""


from pai_mlca.estimation.em_step1 import EmControl, fit_unconditional
from pai_mlca.estimation.em_step2 import fit_structural
from pai_mlca.estimation.estimators import (FitResult, fit, fit_one_step, fit_two_step, fit_two_stage,
                                            align_labels, compare_coefficients, METHODS)
from pai_mlca.estimation.initialization import hierarchical_init, kmodes
