"""Simulation study over copula mixtures

Runs the TKTP screen over a grid of sample sizes, association strengths,
mixing proportions and significance levels, scoring each replicate by how
many of the truly associated draws it selected.

Grid files are INI files::
    [grid]
    family=frank  # or `gaussian`
    sizes=100, 500
    taus=0.3, 0.5, 0.7
    proportions=0.3, 0.4
    alphas=0.05
    replicates=200
    seed=0
    background=gaussian:-0.3  # optional, family:tau of the background

    [tktp]
    window=3
    nsim=1000
"""
import itertools
import logging

import numpy as np
import pandas as pd
import scipy.stats

from .config import Config, RunConfig
from .copula import CopulaSpec, MixtureSpec, sample_mixture
from .errors import ArgumentError, MalformedInputError
from .multistage import generate_reject_boundary, tktp
from .utils import chunked, derive_seed, run_parallel

GRID_SECTION = "grid"
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
RAW_COLUMNS = ["cell", "family", "n", "tau", "p", "alpha", "replicate",
               "k_hat", "selected", "associated", "covered",
               "percent_covered", "percent_selected"]

log = logging.getLogger(__name__)


class Cell(object):
    """One combination of the grid factors"""
    def __init__(self, index, family, n, tau, p, alpha, background=None):
        self.index = index
        self.family = family
        self.n = int(n)
        self.tau = float(tau)
        self.p = float(p)
        self.alpha = float(alpha)
        self.background = background

    def mixture(self):
        return MixtureSpec(CopulaSpec(self.family, self.tau, "tau"), self.p,
                           self.n, self.background)

    def as_dict(self):
        return {"cell": self.index, "family": self.family, "n": self.n,
                "tau": self.tau, "p": self.p, "alpha": self.alpha}

    def __repr__(self):
        return "Cell({family} n={n} tau={tau} p={p} alpha={alpha})".format(
            **self.as_dict())


def _floats(text, key, path):
    try:
        return [float(value) for value in str(text).split(",") if value.strip()]
    except ValueError:
        raise MalformedInputError(path, key, "expected a comma separated list "
                                  "of numbers")


class ExperimentGrid(object):
    """Factors of the study and the TKTP configuration every cell shares"""
    def __init__(self, family, sizes, taus, proportions, alphas=(0.05,),
                 replicates=2000, seed=0, config=None, background=None):
        if family not in ("frank", "gaussian"):
            raise ArgumentError("Study family must be frank or gaussian.")
        if replicates < 1:
            raise ArgumentError("At least one replicate is needed.")
        if not (sizes and taus and proportions and alphas):
            raise ArgumentError("Every grid factor needs at least one level.")

        self.family = family
        self.sizes = [int(n) for n in sizes]
        self.taus = list(taus)
        self.proportions = list(proportions)
        self.alphas = list(alphas)
        self.replicates = int(replicates)
        self.seed = int(seed)
        self.config = config or RunConfig()
        self.background = background

    @classmethod
    def from_file(cls, path, environ=None, **flags):
        """Grid from an INI file, `[tktp]` values resolved like a command's"""
        config = Config(path)
        if not config.files:
            raise ArgumentError("Grid file `{}` does not exist.".format(path))
        grid = config.get_section(GRID_SECTION)
        if not grid:
            raise MalformedInputError(path, GRID_SECTION, "missing section")

        background = None
        if grid.get("background"):
            family, _, strength = grid["background"].partition(":")
            background = CopulaSpec(family.strip(), float(strength or 0),
                                    "tau") if family.strip() != "independence" \
                else CopulaSpec.independence()

        try:
            return cls(
                grid.get("family", "frank").strip(),
                [int(n) for n in _floats(grid.get("sizes", ""), "sizes", path)],
                _floats(grid.get("taus", ""), "taus", path),
                _floats(grid.get("proportions", ""), "proportions", path),
                _floats(grid.get("alphas", "0.05"), "alphas", path),
                int(grid.get("replicates", 2000)),
                int(grid.get("seed", flags.get("seed") or 0)),
                RunConfig.resolve(config, environ, **flags),
                background)
        except ValueError as error:
            raise MalformedInputError(path, GRID_SECTION, str(error))

    def cells(self):
        levels = itertools.product(self.sizes, self.taus, self.proportions,
                                   self.alphas)
        return [Cell(index, self.family, n, tau, p, alpha, self.background)
                for index, (n, tau, p, alpha) in enumerate(levels)]


class CellSummary(object):
    """Aggregated replicates of one cell

    `rate` is the mean percent of associated draws covered over the mean
    percent of the sample selected, `count_rate` the mean number of
    associated draws selected over the mean stopping point.  Both are `None`
    when the mean stopping point is 0.
    """
    def __init__(self, cell, raw):
        self.cell = cell
        self.replicates = len(raw)
        k_hat = raw["k_hat"].to_numpy(dtype=float)
        covered = raw["covered"].to_numpy(dtype=float)
        percent = raw["percent_covered"].to_numpy(dtype=float)
        selected = raw["percent_selected"].to_numpy(dtype=float)

        self.mean_k = float(k_hat.mean())
        self.se_k = _standard_error(k_hat)
        self.mean_covered = float(covered.mean())
        self.se_covered = _standard_error(covered)
        self.mean_percent_covered = float(np.nanmean(percent)) \
            if np.any(~np.isnan(percent)) else float("nan")
        self.se_percent_covered = _standard_error(percent[~np.isnan(percent)])
        self.mean_percent_selected = float(selected.mean())
        self.k_quantiles = dict(zip(QUANTILES, np.quantile(k_hat, QUANTILES)))
        self.k_skew = float(scipy.stats.skew(k_hat)) \
            if self.replicates > 2 and np.ptp(k_hat) > 0 else float("nan")

        if self.mean_k > 0:
            self.rate = self.mean_percent_covered / self.mean_percent_selected
            self.count_rate = self.mean_covered / self.mean_k
        else:
            self.rate = None
            self.count_rate = None

    def as_dict(self):
        values = self.cell.as_dict()
        values.update({
            "replicates": self.replicates,
            "mean_k": self.mean_k,
            "se_k": self.se_k,
            "mean_covered": self.mean_covered,
            "se_covered": self.se_covered,
            "mean_percent_covered": self.mean_percent_covered,
            "se_percent_covered": self.se_percent_covered,
            "mean_percent_selected": self.mean_percent_selected,
            "rate": self.rate,
            "count_rate": self.count_rate,
            "k_skew": self.k_skew,
        })
        for q, value in self.k_quantiles.items():
            values["k_q{:02d}".format(int(round(q * 100)))] = float(value)
        return values


def _standard_error(values):
    if len(values) < 2:
        return float("nan")
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


def _replicates(job):
    """Raw records of the replicates in `job`"""
    cell, config, boundary, seed, replicates = job
    records = []
    for replicate in replicates:
        s = sample_mixture(cell.mixture(),
                           derive_seed(seed, cell.index, replicate))
        result = tktp(s, config, boundary=boundary)
        associated = int(s.labels.sum())
        covered = len(np.intersect1d(result.selected, s.associated))
        record = cell.as_dict()
        record.update({
            "replicate": replicate,
            "k_hat": result.k_hat,
            "selected": len(result.selected),
            "associated": associated,
            "covered": covered,
            "percent_covered": 100.0 * covered / associated
                               if associated else float("nan"),
            "percent_selected": 100.0 * len(result.selected) / s.n,
        })
        records.append(record)
    return records


def run_cell(cell, replicates, seed, config=None, boundary=None, workers=1):
    """Raw replicate records and the summary of one cell

    Replicate r of the cell draws its sample from the stream of
    `(seed, cell.index, r)` so results do not depend on `workers`.
    """
    config = (config or RunConfig()).replace(alpha=cell.alpha)
    if boundary is None:
        boundary = generate_reject_boundary(
            cell.n, config.window, config.nsim, config.alpha, config.seed,
            workers=workers)

    size = max(1, -(-replicates // (max(1, workers) * 4)))
    jobs = [(cell, config, boundary, seed, chunk)
            for chunk in chunked(range(replicates), size)]
    records = [record for chunk in run_parallel(_replicates, jobs, workers)
               for record in chunk]
    raw = pd.DataFrame(records, columns=RAW_COLUMNS)
    return raw, CellSummary(cell, raw)


def run_grid(grid, cache=None, workers=1, step=None):
    """Raw records and summaries over every cell of a grid

    One boundary per (n, alpha) is shared by all cells.  `step` wraps each
    cell in a reporting context manager when given.
    """
    boundaries = {}
    raws, summaries = [], []
    for cell in grid.cells():
        config = grid.config.replace(alpha=cell.alpha)
        key = (cell.n, cell.alpha)
        if key not in boundaries:
            boundaries[key] = cache.fetch_or_generate(cell.n, config) \
                if cache is not None else generate_reject_boundary(
                    cell.n, config.window, config.nsim, config.alpha,
                    config.seed, workers=workers)

        log.info("Running %r over %d replicates.", cell, grid.replicates)
        if step is not None:
            with step("Simulating `{!r}`".format(cell)):
                raw, summary = run_cell(cell, grid.replicates, grid.seed,
                                        config, boundaries[key], workers)
        else:
            raw, summary = run_cell(cell, grid.replicates, grid.seed, config,
                                    boundaries[key], workers)
        raws.append(raw)
        summaries.append(summary)

    raw = pd.concat(raws, ignore_index=True)
    return raw, summary_frame(summaries)


def summary_frame(summaries):
    return pd.DataFrame([summary.as_dict() for summary in summaries])


def rate_of_coverage(summary):
    """Rate of coverage of a cell, `None` when nothing was selected"""
    return summary.rate


def lis_power_floor(n):
    """Expected longest increasing subsequence length of n independent pairs

    Associated subsamples smaller than this are hard to tell from chance.
    """
    if n < 1:
        raise ArgumentError("n must be at least 1.")
    return 2 * np.sqrt(n) - 1.758 * n ** (1.0 / 6)
