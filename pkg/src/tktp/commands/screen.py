"""Series screening command

Screens every series of a table against a lagged predictor series and pools
the time points of the series that pass.

Config settings::
    [tktp]
    min_fraction=0.6  # selected fraction a series needs to pass
    jaccard_threshold=0.8  # J* every pair of a cluster has to exceed
    min_pairs=30  # fewest usable pairs a series may have
"""
import json
import logging

import click
import pandas as pd

from ..click_ext import run_options
from ..screen import complete_linkage_clusters, load_csv, screen_pairs

__commands__ = ["screen"]

log = logging.getLogger(__name__)


# > tktp screen [OPTIONS] <table> <predictor> <lag>
@click.command("screen", short_help="Screen series against a lagged "
               "predictor")
@run_options("alpha", "window", "nsim", "seed", "threads", "tie_break",
             "algorithm", "negate", "min_fraction", "jaccard_threshold",
             "min_pairs", "selection", "cache_dir", "format")
@click.option("-s", "--series", multiple=True, metavar="NAME",
              help="Only screen the named series (repeatable)")
@click.option("--require-complete", is_flag=True, default=False,
              help="Reject series with any missing value")
@click.option("--no-cache", is_flag=True, default=False,
              help="Simulate boundaries without touching the cache")
@click.option("--clusters", default=None, metavar="FILE",
              help="Write the cluster report (JSON) to FILE")
@click.option("--inclusion", default=None, metavar="FILE",
              help="Write per cluster time point inclusion counts (CSV) to "
              "FILE")
@click.option("-o", "--output", default=None, metavar="FILE",
              help="Write the pair report to FILE")
@click.argument("table_file", metavar="TABLE")
@click.argument("predictor")
@click.argument("lag", type=int)
@click.pass_obj
def screen(context, table_file, predictor, lag, series,  # pylint: disable=too-many-arguments
           require_complete, no_cache, clusters, inclusion, output, **flags):
    """Screen the series of TABLE against PREDICTOR lagged by LAG rows

    Every series is paired as (PREDICTOR[t - LAG], series[t]) and screened
    with TKTP; series whose selected fraction reaches the minimum pass.  The
    passing series are clustered by the Jaccard similarity of their selected
    time points.
    """
    config = context.run_config(**flags)
    table = load_csv(table_file)
    cache = None if no_cache else context.boundary_cache(config)
    with log.report_step("Screening series of `{}`".format(table_file),
                         debug=context.debug):
        results = screen_pairs(table, predictor, lag, config,
                               series=list(series) or None, cache=cache,
                               workers=config.threads,
                               require_complete=require_complete)

    passed = [result for result in results if result.passed]
    log.info("%d of %d series pass the %.0f%% screen.", len(passed),
             len(results), 100 * config.min_fraction)
    report = complete_linkage_clusters(passed, config.jaccard_threshold)

    if config.format == "json":
        values = config.describe()
        values.update({"predictor": predictor, "lag": lag,
                       "min_fraction": config.min_fraction,
                       "pairs": [result.as_dict() for result in results]})
        context.write(json.dumps(values, indent=2, sort_keys=True), output)
    else:
        frame = pd.DataFrame([result.as_dict() for result in results],
                             columns=["name", "lag", "n", "k_hat", "fraction",
                                      "pearson", "kendall", "passed",
                                      "error"])
        header = config.header(("predictor", predictor), ("lag", lag),
                               ("min_fraction", config.min_fraction))
        context.write(header + frame.to_csv(index=False), output)

    if clusters:
        values = report.as_dict()
        values.update(config.describe())
        with open(clusters, "w") as f:
            json.dump(values, f, indent=2, sort_keys=True)
    if inclusion:
        with open(inclusion, "w") as f:
            f.write(config.header(("threshold", config.jaccard_threshold)))
            report.inclusion_frame().to_csv(f, index=False)
