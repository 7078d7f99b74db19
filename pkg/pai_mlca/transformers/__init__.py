"""
The module :mod:`~pai_mlca.transformers` contains an estimator which can be used inside a sklearn pipeline.

"""

from pai_mlca.transformers.multilevel_latent_class import MultilevelLatentClass
