"""
The :mod:`~pai_mlca.convenience` submodule contains the Monte Carlo harness that compares the estimators on
simulated data.
"""
