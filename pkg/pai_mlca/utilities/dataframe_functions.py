# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
Utility functions for reading survey style data (one row per unit, a group id column, binary items and covariates)
from a DataFrame or a csv file into a :class:`~pai_mlca.model.core.Dataset`, and for writing posteriors back into
DataFrames in the original row order.
"""

import logging
import re

import numpy as np
import pandas as pd
from patsy import dmatrix

from pai_mlca import defaults
from pai_mlca.model.core import Dataset
from pai_mlca.model.posterior import map_classes

_logger = logging.getLogger(__name__)


def check_for_nans_in_columns(df, columns=None):
    """
    Helper function to check for ``NaN`` in the data frame and raise a ``ValueError`` if there is one.

    :param df: the pandas DataFrame to test for NaNs
    :type df: pandas.DataFrame
    :param columns: a list of columns to test for NaNs. If left empty, all columns of the DataFrame will be tested.
    :type columns: list

    :return: None
    :rtype: None
    :raise: ``ValueError`` naming the first missing cell; missing data is not supported.
    """
    if columns is None:
        columns = df.columns
    missing = pd.isnull(df.loc[:, list(columns)])
    if missing.any().any():
        column = missing.columns[missing.any()][0]
        row = missing.index[missing[column]][0]
        raise ValueError("Missing value in row {} column {!r}; missing data is not supported".format(row, column))


def check_binary_columns(df, columns):
    """
    :raise: ``ValueError`` naming the first cell that is not 0 or 1.
    """
    for column in columns:
        values = pd.to_numeric(df[column], errors="coerce")
        bad = ~values.isin([0, 1])
        if bad.any():
            row = bad.index[bad][0]
            raise ValueError("Item column {!r} must be 0 or 1, found {!r} in row {}".format(column, df.at[row, column],
                                                                                       row))


def _design_column_name(name):
    if name == "Intercept":
        return "intercept"
    match = re.match(r"^Q\('(.*)'\)(.*)$", name)
    return match.group(1) + match.group(2) if match else name


def design_matrix(df, covariate_columns):
    """
    Design matrix with a leading intercept column. Numeric covariates enter as they are, categorical ones are
    treatment coded by patsy.

    :param df: the data
    :type df: pandas.DataFrame
    :param covariate_columns: the covariate columns, may be empty
    :type covariate_columns: list

    :return: the N x K matrix and the names of its columns
    :rtype: tuple
    """
    formula = " + ".join(["1"] + ["Q('{}')".format(c) for c in covariate_columns])
    design = dmatrix(formula, df, NA_action="raise", return_type="dataframe")
    return design.values, [_design_column_name(c) for c in design.columns]


def frame_to_dataset(df, group_column, item_columns, covariate_columns=()):
    """
    Validates the columns and builds the data set; rows are stored grouped.

    :param df: one row per unit
    :type df: pandas.DataFrame
    :param group_column: the column with the group ids
    :type group_column: str
    :param item_columns: the binary item columns
    :type item_columns: list
    :param covariate_columns: the covariate columns (the intercept is added)
    :type covariate_columns: list

    :rtype: pai_mlca.model.core.Dataset
    :raise: ``ValueError`` for unknown columns, missing cells and non-binary items.
    """
    item_columns, covariate_columns = list(item_columns), list(covariate_columns)
    if not item_columns:
        raise ValueError("At least one item column is needed")
    used = [group_column] + item_columns + covariate_columns
    unknown = [c for c in used if c not in df.columns]
    if unknown:
        raise ValueError("Columns {} are not in the data".format(unknown))

    check_for_nans_in_columns(df, used)
    check_binary_columns(df, item_columns)
    Z, names = design_matrix(df, covariate_columns)

    dataset = Dataset(df[item_columns].astype(float).values, df[group_column].values, Z,
                      item_names=item_columns, covariate_names=names)
    small = dataset.group_labels[dataset.sizes < defaults.MIN_GROUP_SIZE]
    if len(small):
        _logger.warning("Groups %s have fewer than %d units; identification of the multilevel model needs at "
                        "least %d units per group", list(small), defaults.MIN_GROUP_SIZE, defaults.MIN_GROUP_SIZE)
    _logger.info(dataset_summary(dataset))
    return dataset


def dataset_summary(dataset):
    """
    One line description of the data: the numbers of groups, units, items and design columns and the range of the
    group sizes.

    :rtype: str
    """
    return "Read {} groups, {} units, {} items and {} design columns (group sizes {} to {})".format(
        dataset.J, dataset.N, dataset.H, dataset.K, dataset.sizes.min(), dataset.sizes.max())


def parse_csv(path, group_column, item_columns, covariate_columns=()):
    """
    Reads a csv file with a header row, see :func:`frame_to_dataset`.

    :raise: ``IOError`` if the file does not exist.
    """
    return frame_to_dataset(pd.read_csv(path), group_column, item_columns, covariate_columns)


def unit_posterior_frame(dataset, posteriors):
    """
    Posterior low-level class probabilities ``sum_m v`` and MAP class (1-based) of every unit, in the row order of
    the input.

    :rtype: pandas.DataFrame
    """
    low = posteriors.v.sum(axis=2)
    low_map, _ = map_classes(dataset, posteriors)
    frame = pd.DataFrame(low, columns=["X{}".format(t + 1) for t in range(low.shape[1])],
                         index=pd.Index(dataset.permutation, name="row"))
    frame.insert(0, "group", dataset.group_labels[dataset.group_index])
    frame["map_low"] = low_map + 1
    return frame.sort_index()


def group_posterior_frame(dataset, posteriors):
    """
    Posterior high-level class probabilities and MAP class (1-based) of every group.

    :rtype: pandas.DataFrame
    """
    _, high_map = map_classes(dataset, posteriors)
    frame = pd.DataFrame(posteriors.u, columns=["W{}".format(m + 1) for m in range(posteriors.u.shape[1])],
                         index=pd.Index(dataset.group_labels, name="group"))
    frame["map_high"] = high_map + 1
    return frame


def dataset_to_frame(dataset, group_column="group"):
    """
    The data set as a DataFrame in the stored (grouped) row order, the intercept column left out.

    :rtype: pandas.DataFrame
    """
    frame = pd.DataFrame(dataset.Y.astype(np.int64), columns=dataset.item_names)
    frame.insert(0, group_column, dataset.group_labels[dataset.group_index])
    for k, name in enumerate(dataset.covariate_names[1:], start=1):
        frame[name] = dataset.Z[:, k]
    return frame
