# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Run configuration of the command line interface. A configuration is a dictionary that starts from the defaults,
is updated from an optional JSON file and then from the command line flags:

>>> config = RunConfig.from_file("run.json")
>>> config.update({"seed": 7})
>>> config.validate()
"""

from __future__ import absolute_import

import json

from pai_mlca import defaults
from pai_mlca.estimation.em_step1 import EmControl
from pai_mlca.estimation.estimators import METHODS
from pai_mlca.examples.multilevel_simulation import N_CONDITIONS
from pai_mlca.utilities.string_manipulation import expand_column_range, parse_int_range

FIT = "fit"
SELECT = "select"
SIMULATE = "simulate"
COMMANDS = (FIT, SELECT, SIMULATE)
ALL = "all"

DEFAULT_CONFIG = {
    "command": None,
    "input": None,
    "out": defaults.RESULT_DIR,
    "group_col": "group",
    "items": None,
    "covariates": [],
    "T": None,
    "M": None,
    "T_range": "1..6",
    "M_range": "1..4",
    "method": "two_step",
    "conditions": "1-36",
    "replicates": 10,
    "estimators": ALL,
    "max_iter": defaults.EM_MAX_ITER,
    "tol": defaults.EM_TOL,
    "n_starts": defaults.N_STARTS,
    "seed": None,
    "n_jobs": defaults.N_PROCESSES,
    "profile": defaults.PROFILING,
    "profiling_filename": defaults.PROFILING_FILENAME,
    "profiling_sorting": defaults.PROFILING_SORTING,
}


class RunConfig(dict):
    """
    Dictionary of all settings of a run. Unknown keys raise a ``ValueError``, both at construction and on update,
    so typos in a configuration file are reported before anything is computed.
    """

    def __init__(self, values=None, **kwargs):
        super(RunConfig, self).__init__(DEFAULT_CONFIG)
        self.update(values or {}, **kwargs)

    def __setitem__(self, key, value):
        if key not in DEFAULT_CONFIG:
            raise ValueError("Unknown configuration key {!r}".format(key))
        super(RunConfig, self).__setitem__(key, value)

    def update(self, values=(), **kwargs):
        for key, value in dict(values, **kwargs).items():
            self[key] = value

    @classmethod
    def from_file(cls, path):
        """
        :raise: ``IOError`` if the file is missing, ``ValueError`` if it is not a JSON object or has unknown keys.
        """
        with open(path) as f:
            values = json.load(f)
        if not isinstance(values, dict):
            raise ValueError("The configuration file {} must contain a JSON object".format(path))
        return cls(values)

    @property
    def item_columns(self):
        return expand_column_range(self["items"])

    @property
    def covariate_columns(self):
        return expand_column_range(self["covariates"])

    @property
    def methods(self):
        key = "method" if self["command"] == FIT else "estimators"
        value = self[key]
        if value == ALL:
            return list(METHODS)
        return expand_column_range(value)

    @property
    def condition_ids(self):
        return parse_int_range(self["conditions"])

    @property
    def T_values(self):
        return parse_int_range(self["T_range"])

    @property
    def M_values(self):
        return parse_int_range(self["M_range"])

    def em_control(self):
        return EmControl(max_iter=self["max_iter"], tol=self["tol"], n_starts=self["n_starts"], seed=self["seed"])

    def validate(self):
        """
        Checks the settings needed by the chosen command.

        :raise: ``ValueError`` describing the first problem.
        """
        command = self["command"]
        if command not in COMMANDS:
            raise ValueError("command must be one of {}, got {!r}".format(", ".join(COMMANDS), command))

        self.em_control()
        if self["seed"] is not None and int(self["seed"]) < 0:
            raise ValueError("seed must not be negative")
        if int(self["n_jobs"]) < 0:
            raise ValueError("n_jobs must not be negative")

        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError("Unknown estimators {}, choose from {} or {}".format(unknown, ", ".join(METHODS), ALL))

        if command in (FIT, SELECT):
            if not self["input"]:
                raise ValueError("The {} command needs an input file".format(command))
            if not self.item_columns:
                raise ValueError("The {} command needs the item columns".format(command))
        if command == FIT:
            for key in ("T", "M"):
                if self[key] is None or int(self[key]) < 1:
                    raise ValueError("{} must be a positive number of classes".format(key))
        if command == SELECT and (min(self.T_values) < 1 or min(self.M_values) < 1):
            raise ValueError("Class numbers must be at least 1")
        if command == SIMULATE:
            if int(self["replicates"]) < 2:
                raise ValueError("At least 2 replicates are needed")
            outside = [c for c in self.condition_ids if not 1 <= c <= N_CONDITIONS]
            if outside:
                raise ValueError("Condition ids must lie in 1..{}, got {}".format(N_CONDITIONS, outside))

    def to_dict(self):
        return dict(self)
