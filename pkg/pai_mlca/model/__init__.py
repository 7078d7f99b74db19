"""
The :mod:`~pai_mlca.model` submodule contains the parameter spaces of the multilevel latent class model and the
computation of its likelihood and posteriors.
"""

from pai_mlca.model.core import (Dataset, ModelDims, MeasurementParams, StructuralParams, ModelParams,
                                 LogLinearParams, to_loglinear, from_loglinear, check_identifiability)
from pai_mlca.model.posterior import Posteriors, item_logdensity, e_step, loglik, map_classes
