"""Screening many lagged series pairs

Loads a table of aligned series, pairs every series with a lagged predictor,
runs the TKTP screen on each pair and pools the selected time points of
similar series by Jaccard similarity and complete linkage clustering.

A selected observation of a pair is identified by the target time t of the
pair (predictor[t - lag], target[t]), so selections of different series over
the same table can be compared.
"""
import logging
import re

import click
import numpy as np
import pandas as pd
import scipy.cluster.hierarchy
import scipy.spatial.distance

from .config import RunConfig
from .errors import (ArgumentError, DataError, DegenerateInputError,
                     InsufficientDataError, MalformedInputError)
from .multistage import generate_reject_boundary, tktp
from .rank import Sample, kendall_tau, negate_y, pearson
from .taupath import BcsPolicy
from .utils import run_parallel

MIN_RESTRICTED = 3
LINE_NUMBER = re.compile(r"line (\d+)")

log = logging.getLogger(__name__)


def _read(path):
    try:
        return pd.read_csv(path, header=None, dtype=str, skipinitialspace=True,
                           keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise ArgumentError("`{}` is empty.".format(path))
    except pd.errors.ParserError as error:
        found = LINE_NUMBER.search(str(error))
        raise MalformedInputError(path, int(found.group(1)) if found else "?",
                                  str(error).strip())
    except IOError as error:
        raise ArgumentError("Can not read `{}`: {}".format(path, error))


def _numbers(frame, path, first_row):
    """Float frame of string cells, blanks become NaN"""
    stripped = frame.apply(lambda column: column.str.strip())
    values = stripped.apply(pd.to_numeric, errors="coerce")
    bad = values.isna() & (stripped != "")
    if bad.any().any():
        row = int(np.flatnonzero(bad.any(axis=1).to_numpy())[0])
        column = frame.columns[int(np.flatnonzero(bad.iloc[row].to_numpy())[0])]
        raise MalformedInputError(path, first_row + row, "`{}` is not a "
                                  "number".format(frame.iloc[row][column]))
    return values


class PriceTable(object):
    """Named series over a shared, strictly increasing time axis

    `values` holds NaN where a cell is missing, `mask` is true there.
    """
    def __init__(self, dates, values):
        self.dates = pd.Index(dates)
        self.values = pd.DataFrame(values, index=range(len(self.dates)),
                                   dtype=float)
        if len(self.values) != len(self.dates):
            raise ArgumentError("Series and dates differ in length.")
        self.mask = self.values.isna()

    @property
    def names(self):
        return list(self.values.columns)

    def __len__(self):
        return len(self.dates)

    def series(self, name):
        if name not in self.values.columns:
            raise DataError("Unknown series `{}`.".format(name))
        return self.values[name].to_numpy()

    def labels(self, positions):
        return self.dates[np.asarray(positions, dtype=int)].astype(str).tolist()


def _time_labels(column, path):
    stripped = column.str.strip()
    numeric = pd.to_numeric(stripped, errors="coerce")
    if not numeric.isna().any():
        return pd.Index(numeric)

    dates = pd.to_datetime(stripped, errors="coerce")
    if dates.isna().any():
        row = int(np.flatnonzero(dates.isna().to_numpy())[0])
        raise MalformedInputError(path, row + 2, "`{}` is not a time "
                                  "label".format(column.iloc[row]))
    return pd.Index(dates)


def load_csv(path):
    """Read a table: a header of series names, time labels first"""
    frame = _read(path)
    header = [str(name).strip() for name in frame.iloc[0]]
    names = header[1:]
    if not names:
        raise MalformedInputError(path, 1, "no series columns")
    duplicates = sorted(set(name for name in names if names.count(name) > 1))
    if duplicates:
        raise DataError("`{}` repeats series {}.".format(
            path, ", ".join(duplicates)))
    if len(frame) < 2:
        raise ArgumentError("`{}` holds no rows.".format(path))

    body = frame.iloc[1:].reset_index(drop=True)
    dates = _time_labels(body[0], path)
    for row in range(1, len(dates)):
        if dates[row] == dates[row - 1]:
            raise MalformedInputError(path, row + 2, "duplicate time label "
                                      "`{}`".format(dates[row]))
        if dates[row] < dates[row - 1]:
            raise MalformedInputError(path, row + 2, "time labels out of "
                                      "order")

    values = _numbers(body[body.columns[1:]], path, 2)
    values.columns = names
    return PriceTable(dates, values)


def load_sample(path):
    """Read a two column (x, y) sample

    A leading header row is skipped, a third column makes the first one the
    observation ids.
    """
    frame = _read(path)
    if frame.shape[1] not in (2, 3):
        raise MalformedInputError(path, 1, "expected 2 or 3 columns, found "
                                  "{}".format(frame.shape[1]))
    first_row = 1
    numeric = pd.to_numeric(frame.iloc[0].str.strip(), errors="coerce")
    if numeric.iloc[-2:].isna().any():
        frame = frame.iloc[1:]
        first_row = 2
    if len(frame) == 0:
        raise ArgumentError("`{}` holds no observations.".format(path))

    ids = None
    if frame.shape[1] == 3:
        ids = frame[0].str.strip().to_numpy()
        frame = frame[frame.columns[1:]]
    values = _numbers(frame, path, first_row)
    if values.isna().any().any():
        row = int(np.flatnonzero(values.isna().any(axis=1).to_numpy())[0])
        raise MalformedInputError(path, first_row + row, "missing value")
    if len(values) < 2:
        raise ArgumentError("`{}` needs at least two observations.".format(
            path))

    if ids is not None:
        numeric_ids = pd.to_numeric(pd.Series(ids), errors="coerce")
        if not numeric_ids.isna().any() and \
                (numeric_ids == numeric_ids.round()).all():
            ids = numeric_ids.astype(np.int64).to_numpy()
    return Sample(values.iloc[:, 0].to_numpy(), values.iloc[:, 1].to_numpy(),
                  ids)


def lag_align(table, target, predictor, lag, min_pairs=30,
              require_complete=False):
    """Pairs (predictor[t - lag], target[t]) with ids t

    Pairs touching a missing cell are dropped, or with `require_complete`
    any gap in either series is an error.
    """
    if lag < 0:
        raise ArgumentError("Lag must be non-negative.")
    y = table.series(target)
    x = table.series(predictor)
    if require_complete and (np.isnan(x).any() or np.isnan(y).any()):
        raise DataError("`{}` or `{}` has missing values and complete series "
                        "are required.".format(target, predictor))

    t = np.arange(lag, len(table))
    x, y = x[t - lag], y[t]
    usable = ~(np.isnan(x) | np.isnan(y))
    if usable.sum() < min_pairs:
        raise InsufficientDataError(target, int(usable.sum()), min_pairs)
    return Sample(x[usable], y[usable], t[usable])


class PairResult(object):
    """Screen outcome of one target series against the lagged predictor

    `selected` holds the target time positions the screen selected.
    Restricted correlations are `None` below three selected pairs; `error`
    is set instead of the rest when the pair could not be screened.
    """
    def __init__(self, name, lag, n=0, k_hat=0, selected=(), labels=(),
                 pearson=None, kendall=None, error=None, passed=False):
        self.name = name
        self.lag = lag
        self.n = n
        self.k_hat = k_hat
        self.selected = np.asarray(selected, dtype=int)
        self.labels = list(labels)
        self.pearson = pearson
        self.kendall = kendall
        self.error = error
        self.passed = passed

    @property
    def fraction(self):
        return len(self.selected) / float(self.n) if self.n else 0.0

    def as_dict(self):
        return {
            "name": self.name,
            "lag": self.lag,
            "n": self.n,
            "k_hat": self.k_hat,
            "fraction": self.fraction,
            "pearson": self.pearson,
            "kendall": self.kendall,
            "passed": self.passed,
            "selected": self.labels,
            "error": self.error,
        }


def _restricted(s, selected):
    if len(selected) < MIN_RESTRICTED:
        return None, None
    subset = s.subset(selected)
    try:
        return pearson(subset), kendall_tau(subset)
    except DegenerateInputError:
        return None, None


def _screen_one(job):
    table, name, predictor, lag, config, boundaries, require_complete = job
    try:
        s = lag_align(table, name, predictor, lag, config.min_pairs,
                      require_complete)
        screened = negate_y(s) if config.negate else s
        result = tktp(screened, config, boundary=boundaries.get(s.n))
        selected = np.sort(result.selected)
        r, kendall = _restricted(screened, selected)
        return PairResult(name, lag, s.n, result.k_hat, selected,
                          table.labels(selected), r, kendall,
                          passed=result.fraction >= config.min_fraction)
    except click.ClickException as error:
        return PairResult(name, lag, error=error.format_message())
    except Exception as error:  # pylint: disable=broad-except
        log.debug("Screening `%s` failed.", name, exc_info=True)
        return PairResult(name, lag, error="{}: {}".format(
            error.__class__.__name__, error))


def screen_pairs(table, predictor, lag, config=None, min_fraction=None,
                 series=None, cache=None, workers=1, require_complete=False):
    """Screen every series (all but the predictor by default) at `lag`

    Results are ordered by series name.  A pair passes when the selected
    fraction reaches `min_fraction`; pairs that fail to align or screen carry
    their error instead.
    """
    config = config or RunConfig()
    if min_fraction is not None:
        config = config.replace(min_fraction=min_fraction)
    table.series(predictor)
    names = sorted(series if series is not None else
                   [name for name in table.names if name != predictor])
    for name in names:
        table.series(name)

    boundaries = {}
    policy = BcsPolicy.from_config(config)
    for name in names:
        try:
            n = len(lag_align(table, name, predictor, lag, config.min_pairs,
                              require_complete))
        except click.ClickException:
            continue
        if n in boundaries or n < config.window + 2:
            continue
        boundaries[n] = cache.fetch_or_generate(n, config, policy) \
            if cache is not None else generate_reject_boundary(
                n, config.window, config.nsim, config.alpha, config.seed,
                policy=policy, workers=config.threads)

    jobs = [(table, name, predictor, lag, config, boundaries, require_complete)
            for name in names]
    results = run_parallel(_screen_one, jobs, workers)
    failed = [result for result in results if result.error]
    if failed:
        log.warning("%d of %d series could not be screened.", len(failed),
                    len(results))
    return results


def jaccard(a, b):
    """|A & B| / |A | B|, 0 when both sets are empty"""
    a, b = set(a), set(b)
    union = a | b
    if not union:
        log.warning("Jaccard similarity of two empty sets taken as 0.")
        return 0.0
    return len(a & b) / float(len(union))


class ClusterReport(object):
    """Series clusters whose selections are pairwise similar above J*"""
    def __init__(self, clusters, threshold, results):
        self.clusters = clusters
        self.threshold = threshold
        self._results = dict((result.name, result) for result in results)

    def inclusion_counts(self, cluster):
        """Number of members selecting each time position of a cluster"""
        counts = {}
        for name in cluster:
            result = self._results[name]
            for position, label in zip(result.selected, result.labels):
                key = (int(position), label)
                counts[key] = counts.get(key, 0) + 1
        return sorted(counts.items())

    def inclusion_frame(self):
        rows = []
        for index, cluster in enumerate(self.clusters):
            for (position, label), count in self.inclusion_counts(cluster):
                rows.append((index, position, label, count))
        return pd.DataFrame(rows, columns=["cluster", "position", "label",
                                           "count"])

    def as_dict(self):
        return {
            "threshold": self.threshold,
            "clusters": [list(cluster) for cluster in self.clusters],
        }


def complete_linkage_clusters(results, threshold=0.8):
    """Complete linkage clusters on 1 - J of the selected time points

    Clusters of at least two series whose every member pair has J above the
    threshold are reported, largest first.
    """
    results = [result for result in results if result.error is None]
    if not 0 <= threshold < 1:
        raise ArgumentError("Jaccard threshold must lie in [0, 1).")
    if len(results) < 2:
        return ClusterReport([], threshold, results)

    sets = [set(result.selected.tolist()) for result in results]
    size = len(sets)
    distance = np.zeros((size, size))
    for i in range(size):
        for j in range(i + 1, size):
            distance[i, j] = distance[j, i] = 1 - jaccard(sets[i], sets[j])

    linkage = scipy.cluster.hierarchy.linkage(
        scipy.spatial.distance.squareform(distance, checks=False),
        method="complete")
    cut = np.nextafter(1 - threshold, -np.inf)
    flat = scipy.cluster.hierarchy.fcluster(linkage, cut, criterion="distance")

    clusters = []
    for label in np.unique(flat):
        members = np.flatnonzero(flat == label)
        if len(members) < 2:
            continue
        linked = all(jaccard(sets[i], sets[j]) > threshold
                     for i in members for j in members if i < j)
        if not linked:
            log.warning("Dropping a cluster that is not completely linked "
                        "above %s.", threshold)
            continue
        clusters.append(sorted(results[i].name for i in members))

    clusters.sort(key=lambda cluster: (-len(cluster), cluster))
    return ClusterReport(clusters, threshold, results)
