"""
This :mod:`~pai_mlca.utilities` submodule contains several utility functions.
Those should only be used internally inside pai_mlca.
"""
