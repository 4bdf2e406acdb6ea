"""Tau-path, selection and boundary commands

The single sample commands.  Input samples are two column CSV files (an
optional header, an optional leading id column), reports are CSV or JSON.

Config settings::
    [tktp]
    format=csv  # report format of every command
    cache_dir=~/.tktp/boundaries  # where simulated boundaries are kept
"""
import json
import logging

import click
import pandas as pd

from ..click_ext import run_options
from ..multistage import tktp as screen_sample
from ..rank import negate_y
from ..screen import load_sample
from ..taupath import BcsPolicy, taupath as search

__commands__ = ["taupath", "select", "boundary"]

log = logging.getLogger(__name__)


def _dumps(values):
    return json.dumps(values, indent=2, sort_keys=True)


# > tktp taupath [OPTIONS] <input>
@click.command("taupath", short_help="Order a sample along its tau-path")
@run_options("tie_break", "algorithm", "seed", "negate", "threads", "format")
@click.option("-o", "--output", default=None, metavar="FILE",
              help="Write the report to FILE")
@click.argument("input_file", metavar="INPUT")
@click.pass_obj
def taupath(context, input_file, output, **flags):
    """Tau-path of the sample in INPUT

    Reports the observation ids in path order with the Kendall tau of every
    prefix.  With `--negate` the path of the sample with y negated is
    reported, which screens for negative association.
    """
    config = context.run_config(**flags)
    s = load_sample(input_file)
    if config.negate:
        s = negate_y(s)

    r = search(s, BcsPolicy.from_config(config), max_n=config.max_n)
    log.info("Tau-path of %d observations halted at stage %s.", s.n, r.halt)
    if config.format == "json":
        report = config.describe()
        report.update({"pi": r.pi.tolist(), "tau": r.tau.tolist(),
                       "halt": r.halt, "negate": config.negate})
        context.write(_dumps(report), output)
    else:
        frame = pd.DataFrame({"stage": range(1, r.n + 1), "id": r.pi,
                              "tau": r.tau})
        context.write(frame.to_csv(index=False), output)


# > tktp select [OPTIONS] <input>
@click.command("select", short_help="Screen a sample for an associated "
               "subsample")
@run_options("alpha", "window", "nsim", "seed", "threads", "tie_break",
             "algorithm", "negate", "selection", "cache_dir", "format")
@click.option("--no-cache", is_flag=True, default=False,
              help="Simulate the boundary without touching the cache")
@click.option("-o", "--output", default=None, metavar="FILE",
              help="Write the report to FILE")
@click.argument("input_file", metavar="INPUT")
@click.pass_obj
def select(context, input_file, no_cache, output, **flags):
    """TKTP screen of the sample in INPUT

    Runs the tau-path, its MAMLE curve and the stopping rule against the
    null reject boundary for the sample size, and reports the stopping
    stage with the selected observation ids.
    """
    config = context.run_config(**flags)
    s = load_sample(input_file)
    if config.negate:
        s = negate_y(s)

    cache = None if no_cache else context.boundary_cache(config)
    with log.report_step("Screening {} observations".format(s.n),
                         debug=context.debug):
        result = screen_sample(s, config, cache=cache)

    if config.format == "json":
        report = config.describe()
        report.update(result.as_dict())
        context.write(_dumps(report), output)
    else:
        frame = pd.DataFrame({"stage": range(1, len(result.selected) + 1),
                              "id": result.selected})
        header = config.header(("n", s.n), ("k_hat", result.k_hat))
        context.write(header + frame.to_csv(index=False), output)


# > tktp boundary [OPTIONS] <n>
@click.command("boundary", short_help="Simulate (or look up) a reject "
               "boundary")
@run_options("alpha", "window", "nsim", "seed", "threads", "tie_break",
             "cache_dir", "format")
@click.option("-o", "--output", default=None, metavar="FILE",
              help="Write the report to FILE")
@click.argument("n", type=int)
@click.pass_obj
def boundary(context, n, output, **flags):
    """Reject boundary for samples of size N

    The boundary is kept in the cache directory, a repeated call with the
    same parameters reads it back instead of simulating again.
    """
    config = context.run_config(**flags)
    cache = context.boundary_cache(config)
    with log.report_step("Preparing the boundary for n={}".format(n),
                         debug=context.debug):
        result = cache.fetch_or_generate(n, config)

    if config.format == "json":
        report = config.describe()
        report.update({"n": n, "stages": result.stages.tolist(),
                       "q": result.q.tolist()})
        context.write(_dumps(report), output)
    else:
        frame = pd.DataFrame({"stage": result.stages, "q": result.q})
        context.write(config.header(("n", n)) +
                      frame.to_csv(index=False, float_format="%.17g"), output)
