"""Simulation study and benchmark commands

`simulate` runs a copula mixture grid (see `tktp.simstudy` for the grid file
layout), `bench` holds the timing and profiling measurements of the tau-path
search.
"""
import json
import logging

import click

from ..bench import ITERATIONS, doubling_ratios, profile_sweep
from ..click_ext import SmartGroup, run_options
from ..simstudy import ExperimentGrid, run_grid
from ..utils import align_table

__commands__ = ["simulate", "bench_group"]

log = logging.getLogger(__name__)


# > tktp simulate [OPTIONS] <grid>
@click.command("simulate", short_help="Run a copula mixture simulation grid")
@run_options("window", "nsim", "seed", "threads", "tie_break", "algorithm",
             "selection", "cache_dir", "format")
@click.option("--no-cache", is_flag=True, default=False,
              help="Simulate boundaries without touching the cache")
@click.option("--raw", default=None, metavar="FILE",
              help="Also write the per replicate records to FILE (CSV)")
@click.option("-o", "--output", default=None, metavar="FILE",
              help="Write the cell summaries to FILE")
@click.argument("grid_file", metavar="GRID")
@click.pass_obj
def simulate(context, grid_file, no_cache, raw, output, **flags):
    """Run the TKTP screen over every cell of the GRID file

    Each cell summary holds the mean stopping stage, coverage of the
    associated draws and the rate of coverage, with standard errors and
    stopping stage quantiles.
    """
    grid = ExperimentGrid.from_file(grid_file, context.environ, **flags)
    config = grid.config
    cache = None if no_cache else context.boundary_cache(config)
    log.info("Grid of %d cells, %d replicates each.", len(grid.cells()),
             grid.replicates)

    def step(msg):
        return log.report_step(msg, debug=context.debug)

    records, summaries = run_grid(grid, cache=cache, workers=config.threads,
                                  step=step)
    if raw:
        records.to_csv(raw, index=False)
        log.info("Wrote `%s`.", raw)

    if config.format == "json":
        context.write(summaries.to_json(orient="records", indent=2), output)
    else:
        context.write(summaries.to_csv(index=False), output)


BENCH_HELP = """Measure the tau-path search

`doubling` times the search over doubling sample sizes, `profile` counts the
stage events of instrumented runs.
"""


# > tktp bench <...>
@click.group("bench", help=BENCH_HELP, cls=SmartGroup,
             short_help="Time and profile the tau-path search")
def bench_group():
    """Group for the benchmark measurements."""


# > tktp bench doubling [OPTIONS] <n_lo> <n_hi>
@bench_group.command("doubling", short_help="Doubling ratio experiment")
@run_options("algorithm", "seed", "format")
@click.option("-i", "--iterations", type=int, default=ITERATIONS,
              help="Timed runs per size")
@click.option("-o", "--output", default=None, metavar="FILE",
              help="Write the report to FILE")
@click.argument("n_lo", type=int)
@click.argument("n_hi", type=int)
@click.pass_obj
def doubling(context, n_lo, n_hi, iterations, output, **flags):
    """Time the search at N_LO, 2 N_LO, ... up to N_HI

    Reports the mean runtime of every size, the ratio to the previous size
    and its binary log, the estimated order of growth.
    """
    config = context.run_config(**flags)
    report = doubling_ratios(n_lo, n_hi, config.algorithm, iterations,
                             config.seed)
    frame = report.frame()
    if config.format == "json":
        context.write(frame.to_json(orient="records", indent=2), output)
    else:
        context.write(frame.to_csv(index=False), output)


# > tktp bench profile [OPTIONS] <sizes>...
@bench_group.command("profile", short_help="Stage event counters")
@run_options("algorithm", "seed", "format")
@click.option("-r", "--runs", type=int, default=100,
              help="Instrumented runs per size")
@click.option("-o", "--output", default=None, metavar="FILE",
              help="Write the report to FILE")
@click.argument("sizes", type=int, nargs=-1, required=True)
@click.pass_obj
def profile(context, sizes, runs, output, **flags):
    """Mean stage event counts of the search at every size in SIZES

    With more than one size, linear cost models of each counter against n
    are fitted and logged (JSON reports carry them).
    """
    config = context.run_config(**flags)
    frame, models = profile_sweep(sizes, runs, config.seed, config.algorithm)
    if models:
        rows = [["counter", "intercept", "slope"]] + [
            [name, "{:.3f}".format(intercept), "{:.5f}".format(slope)]
            for name, (intercept, slope) in sorted(models.items())]
        for line in align_table(rows):
            log.info(line)

    if config.format == "json":
        context.write(json.dumps({
            "means": json.loads(frame.to_json(orient="records")),
            "models": dict((name, {"intercept": intercept, "slope": slope})
                           for name, (intercept, slope) in models.items()),
        }, indent=2, sort_keys=True), output)
    else:
        context.write(frame.to_csv(index=False), output)
