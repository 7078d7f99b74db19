"""
The :mod:`~pai_mlca.selection` module contains the information criteria and the level by level selection of the
numbers of latent classes.
"""


from pai_mlca.selection.criteria import information_criteria, entropy_r2
from pai_mlca.selection.selection import hierarchical_select, SelectionResult
