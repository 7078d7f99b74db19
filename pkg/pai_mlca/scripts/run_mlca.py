# -*- coding: utf-8 -*-
# This file as well as the whole pai_mlca package are licenced under the MIT licence (see the LICENCE.txt)
"""
This script can be run with:


.. code-block:: bash

   python run_mlca.py fit --input data.csv --group-col id --items y1..y10 --covariates z1,z2 --T 3 --M 2 \
       --method two_step --seed 1 --out results
   python run_mlca.py select --input data.csv --group-col id --items y1..y10 --T-range 1..6 --M-range 1..4
   python run_mlca.py simulate --conditions 1-36 --replicates 10 --estimators all

Every run writes its csv files and a ``manifest.json`` (configuration, seeds, library version, timings) into the
output directory. The exit code is 0 on success, 1 for invalid input and 2 for numerical failures or
non-convergence.
"""

from __future__ import absolute_import

import argparse
import json
import logging
import os
import sys

import numpy as np

import pai_mlca
from pai_mlca.convenience.monte_carlo import run_study, to_long
from pai_mlca.estimation.estimators import align_labels, compare_coefficients, fit
from pai_mlca.examples.multilevel_simulation import condition, conditions_table
from pai_mlca.scripts.settings import FIT, SELECT, SIMULATE, RunConfig
from pai_mlca.selection.selection import hierarchical_select
from pai_mlca.utilities.dataframe_functions import dataset_summary, group_posterior_frame, parse_csv, \
    unit_posterior_frame
from pai_mlca.utilities.exceptions import NumericalError
from pai_mlca.utilities.profiling import end_profiling, start_profiling
from pai_mlca.utilities.string_manipulation import split_parameter_name

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError("{!r} is not JSON serialisable".format(value))


def write_manifest(config, out, **content):
    manifest = {"version": pai_mlca.__version__, "config": config.to_dict()}
    manifest.update(content)
    with open(os.path.join(out, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=_json_default)


def format_coefficient_report(results):
    """
    Text report of the logit coefficients: one column per fit, every coefficient as its estimate with significance
    stars followed by a line with the standard error in parentheses.

    :param results: fits with aligned class labels
    :type results: list of pai_mlca.estimation.estimators.FitResult

    :rtype: str
    """
    tables = [r.coefficient_table() for r in results]
    names = [name for name in tables[0].index if split_parameter_name(name)["block"] == "gamma"]
    width = 14

    lines = ["Logit coefficients of the low-level classes (reference class X1)", "",
             "{:<32}".format("") + "".join("{:>{}}".format(r.method, width) for r in results)]
    for name in names:
        parts = split_parameter_name(name)
        label = "W{} X{} {}".format(parts["high"], parts["low"], parts["covariate"])
        lines.append("{:<32}".format(label) + "".join(
            "{:>{}}".format("{:.3f}{:<3}".format(t.at[name, "estimate"], t.at[name, "stars"]), width)
            for t in tables))
        lines.append("{:<32}".format("") + "".join(
            "{:>{}}".format("({:.3f})   ".format(t.at[name, "se"]), width) for t in tables))
    lines.append("")
    for r in results:
        lines.append("{}: omega = ({}), loglik = {:.2f}, standard errors: {}".format(
            r.method, ", ".join("{:.3f}".format(w) for w in r.omega), r.loglik, r.covariance_tag))
    lines += ["", "*** p<0.01, ** p<0.05, * p<0.1"]
    lines += sorted(set(t.attrs["note"] for t in tables if "note" in t.attrs))
    return "\n".join(lines) + "\n"


def _read_data(config):
    dataset = parse_csv(config["input"], config["group_col"], config.item_columns, config.covariate_columns)
    print(dataset_summary(dataset))
    return dataset


def cmd_fit(config, out):
    dataset = _read_data(config)
    dims = dataset.dims(int(config["T"]), int(config["M"]))
    ctrl = config.em_control()

    results = [fit(dataset, dims, method, ctrl=ctrl, n_jobs=int(config["n_jobs"])) for method in config.methods]
    reference = results[0].params
    results = [results[0]] + [align_labels(r, reference) for r in results[1:]]

    if len(results) == 1:
        results[0].coefficient_table().to_csv(os.path.join(out, "coefficients.csv"))
    else:
        compare_coefficients(results).to_csv(os.path.join(out, "coefficients.csv"))
    with open(os.path.join(out, "report.txt"), "w") as f:
        f.write(format_coefficient_report(results))

    for r in results:
        units = unit_posterior_frame(dataset, r.posteriors)
        groups = group_posterior_frame(dataset, r.posteriors)
        units.to_csv(os.path.join(out, "{}_posteriors_low.csv".format(r.method)))
        groups.to_csv(os.path.join(out, "{}_posteriors_high.csv".format(r.method)))
        units[["group", "map_low"]].to_csv(os.path.join(out, "{}_map_low.csv".format(r.method)))
        groups[["map_high"]].to_csv(os.path.join(out, "{}_map_high.csv".format(r.method)))

    complete = all(r.converged_all for r in results)
    write_manifest(config, out, command=FIT, complete=complete, seed=ctrl.seed,
                   data={"J": dataset.J, "N": dataset.N, "H": dataset.H, "K": dataset.K},
                   fits=[dict(r.summary(), class_proportions=r.class_proportions(dataset).values.tolist())
                         for r in results])
    if not complete:
        _logger.error("At least one EM phase did not converge, the outputs are flagged incomplete")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_select(config, out):
    dataset = _read_data(config)
    result = hierarchical_select(dataset, config.T_values, config.M_values, ctrl=config.em_control(),
                                 n_jobs=int(config["n_jobs"]))
    result.table.to_csv(os.path.join(out, "selection.csv"), index=False)
    write_manifest(config, out, command=SELECT, complete=True, seed=config["seed"],
                   selected={"T": result.T, "M": result.M, "T_first_phase": result.T_first_phase})
    _logger.info("Selected T=%d, M=%d", result.T, result.M)
    return EXIT_OK


def cmd_simulate(config, out):
    conditions = [condition(c) for c in config.condition_ids]
    study = run_study(conditions, int(config["replicates"]), estimators=config.methods, seed=config["seed"],
                      n_jobs=int(config["n_jobs"]), ctrl=config.em_control())
    study.records.to_csv(os.path.join(out, "replicates.csv"), index=False)
    study.metrics.to_csv(os.path.join(out, "aggregate.csv"), index=False)
    study.failures.to_csv(os.path.join(out, "failures.csv"), index=False)
    to_long(study.metrics).to_csv(os.path.join(out, "metrics_long.csv"), index=False)
    conditions_table(conditions).to_csv(os.path.join(out, "conditions.csv"))
    write_manifest(config, out, command=SIMULATE, complete=True, seed=config["seed"],
                   unreliable_cells=study.failures[study.failures["unreliable"]][["condition", "estimator"]]
                   .values.tolist())
    return EXIT_OK


COMMAND_FUNCTIONS = {FIT: cmd_fit, SELECT: cmd_select, SIMULATE: cmd_simulate}


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with settings; flags given on the command line override it.")
    common.add_argument("--out", help="Output directory. Defaults to 'results'.")
    common.add_argument("--seed", type=int, help="Master seed of all random streams.")
    common.add_argument("--n-jobs", dest="n_jobs", type=int,
                        help="Number of worker processes, 0 runs serially. Defaults to half of the cores.")
    common.add_argument("--max-iter", dest="max_iter", type=int, help="Maximal number of EM iterations.")
    common.add_argument("--tol", type=float, help="Threshold of the relative log-likelihood change.")
    common.add_argument("--n-starts", dest="n_starts", type=int, help="Number of random EM starts.")
    common.add_argument("--profile", action="store_const", const=True, help="Write cProfile statistics.")
    common.add_argument("--log-level", dest="log_level", default="WARNING", help="Logging level, e.g. INFO.")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", help="CSV file with one row per unit and a header row.")
    data.add_argument("--group-col", dest="group_col", help="Column with the group ids.")
    data.add_argument("--items", help="Binary item columns, e.g. y1..y10 or a,b,c.")
    data.add_argument("--covariates", help="Covariate columns, e.g. gender,books.")

    parser = argparse.ArgumentParser(description="Multilevel latent class models with covariates: estimation by the "
                                                 "one-step, two-step and two-stage estimators, selection of the "
                                                 "numbers of classes and the simulation study.")
    commands = parser.add_subparsers(dest="command")

    fit_parser = commands.add_parser(FIT, parents=[common, data], help="Fit a model to a CSV file.")
    fit_parser.add_argument("--T", dest="T", type=int, help="Number of low-level classes.")
    fit_parser.add_argument("--M", dest="M", type=int, help="Number of high-level classes.")
    fit_parser.add_argument("--method", help="one_step, two_step, two_stage or all.")

    select_parser = commands.add_parser(SELECT, parents=[common, data], help="Select the numbers of classes.")
    select_parser.add_argument("--T-range", dest="T_range", help="Candidate low-level class numbers, e.g. 1..6.")
    select_parser.add_argument("--M-range", dest="M_range", help="Candidate high-level class numbers, e.g. 1..4.")

    simulate_parser = commands.add_parser(SIMULATE, parents=[common], help="Run the simulation study.")
    simulate_parser.add_argument("--conditions", help="Condition ids, e.g. 1-36 or 1,19,36.")
    simulate_parser.add_argument("--replicates", type=int, help="Replicates per condition.")
    simulate_parser.add_argument("--estimators", help="Estimators to compare, e.g. all or one_step,two_step.")
    return parser


def _config_from_args(args):
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    flags = {key: value for key, value in vars(args).items()
             if value is not None and key not in ("config", "log_level")}
    config.update(flags)
    config.validate()
    return config


def main(console_args=None):
    """
    Runs one command and returns the exit code.

    :param console_args: the arguments, defaults to ``sys.argv[1:]``
    :type console_args: list of str

    :rtype: int
    """
    args = _build_parser().parse_args(console_args)
    logging.basicConfig(level=getattr(logging, str(getattr(args, "log_level", "WARNING")).upper(), logging.WARNING),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if args.command is None:
        _logger.error("No command given, choose from %s", ", ".join(COMMAND_FUNCTIONS))
        return EXIT_INPUT

    try:
        config = _config_from_args(args)
        out = config["out"]
        if not os.path.isdir(out):
            os.makedirs(out)

        profiler = start_profiling() if config["profile"] else None
        try:
            return COMMAND_FUNCTIONS[config["command"]](config, out)
        finally:
            if profiler is not None:
                end_profiling(profiler, os.path.join(out, config["profiling_filename"]),
                              config["profiling_sorting"])
    except NumericalError as e:
        _logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    except (ValueError, IOError, KeyError) as e:
        _logger.error("Invalid input: %s", e)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
