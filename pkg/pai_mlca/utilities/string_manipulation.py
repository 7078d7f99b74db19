# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)

from __future__ import absolute_import, division

import re

from six import string_types


def structural_parameter_names(M, T, covariate_names):
    """
    Names of the entries of the structural vector ``(alpha, vec Gamma)``, with 1-based class labels:

       alpha__W<m>                     log(omega[m] / omega[1]) for m = 2..M
       gamma__W<m>__X<t>__<covariate>  logit coefficient of low-level class t (t = 2..T) in high-level class m

    :param M: number of high-level classes
    :type M: int
    :param T: number of low-level classes
    :type T: int
    :param covariate_names: names of the K design columns
    :type covariate_names: list

    :return: the parameter names in vector order
    :rtype: list
    """
    names = ["alpha__W{}".format(m + 1) for m in range(1, M)]
    names += ["gamma__W{}__X{}__{}".format(m + 1, t + 1, covariate)
              for m in range(M) for t in range(1, T) for covariate in covariate_names]
    return names


def split_parameter_name(name):
    """
    Inverse of :func:`structural_parameter_names` for a single name.

    :return: a dictionary with the keys ``block``, ``high``, ``low`` and ``covariate`` (None where not applicable)
    :rtype: dict
    """
    parts = name.split("__")
    if parts[0] == "alpha" and len(parts) == 2:
        return {"block": "alpha", "high": int(parts[1][1:]), "low": None, "covariate": None}
    if parts[0] == "gamma" and len(parts) == 4:
        return {"block": "gamma", "high": int(parts[1][1:]), "low": int(parts[2][1:]), "covariate": parts[3]}
    raise ValueError("Not a structural parameter name: {!r}".format(name))


def expand_column_range(value):
    """
    Expands a column range into a list of column names. ``"y1..y10"`` gives ``y1, y2, ..., y10`` (the
    prefix must agree on both ends), ``"a,b,c"`` gives the listed names and both forms can be mixed.

    :param value: the range or an already expanded list
    :type value: str or list

    :rtype: list
    """
    if value is None:
        return []
    if not isinstance(value, string_types):
        return [str(x) for x in value]

    columns = []
    for part in filter(None, (p.strip() for p in value.split(","))):
        if ".." not in part:
            columns.append(part)
            continue
        first, last = part.split("..", 1)
        match_first = re.match(r"^(.*?)(\d+)$", first)
        match_last = re.match(r"^(.*?)(\d+)$", last)
        if not match_first or not match_last or match_first.group(1) != match_last.group(1):
            raise ValueError("Cannot expand the column range {!r}".format(part))
        start, stop = int(match_first.group(2)), int(match_last.group(2))
        if stop < start:
            raise ValueError("Empty column range {!r}".format(part))
        columns += ["{}{}".format(match_first.group(1), i) for i in range(start, stop + 1)]
    return columns


def parse_int_range(value):
    """
    Parses integer ranges like ``"1-36"``, ``"1..6"`` or ``"1,19,36"`` (mixed forms allowed) into a sorted list
    without duplicates.

    :type value: str or int or list
    :rtype: list
    """
    if isinstance(value, int):
        return [value]
    if not isinstance(value, string_types):
        return sorted(set(int(x) for x in value))

    values = set()
    for part in filter(None, (p.strip() for p in value.split(","))):
        bounds = re.split(r"\.\.|-", part)
        try:
            if len(bounds) == 1:
                values.add(int(bounds[0]))
            elif len(bounds) == 2:
                start, stop = int(bounds[0]), int(bounds[1])
                if stop < start:
                    raise ValueError
                values.update(range(start, stop + 1))
            else:
                raise ValueError
        except ValueError:
            raise ValueError("Cannot parse the integer range {!r}".format(part))
    if not values:
        raise ValueError("Empty integer range {!r}".format(value))
    return sorted(values)
