"""
Module with synthetic data sets to play around with: the conditions of the simulation study and a survey shaped
data set.
"""
from __future__ import absolute_import
from .multilevel_simulation import condition, generate, load_synthetic_survey, SimCondition
