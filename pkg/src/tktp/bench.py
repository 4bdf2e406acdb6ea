"""Runtime and behaviour measurements of the tau-path search

`ProfileCounters` is the probe the search reports its stage events to,
`doubling_ratios` times the search over doubling sample sizes and reads the
order of growth off the binary log of consecutive runtime ratios.
"""
import logging
import time

import numpy as np
import pandas as pd

from .errors import ArgumentError, SizeError
from .rank import Sample
from .taupath import BcsPolicy, taupath
from .utils import stream

ITERATIONS = 5
COUNTERS = ["n_r", "n_t", "mean_tieset", "n_m", "n_fs", "n_fd", "i_h"]

log = logging.getLogger(__name__)


class ProfileCounters(object):
    """Stage event counts of one tau-path search

    `n_r` counts passes through the stage loop (a search that halts before
    its first elimination counts one), `n_t` stages with a tie, `n_m` stages
    whose observation was a member of a recorded tieset, `n_fs` forward steps
    and `n_fd` the stages they skip.  `i_h` is the halting stage.
    """
    def __init__(self):
        self.n_r = 0
        self.n_t = 0
        self.tie_sizes = []
        self.n_m = 0
        self.n_fs = 0
        self.n_fd = 0
        self.resets = []
        self.i_h = None

    def iteration(self):
        self.n_r += 1

    def tie(self, size):
        self.n_t += 1
        self.tie_sizes.append(size)

    def membership(self):
        self.n_m += 1

    def forward(self, stage, k):
        self.n_fs += 1
        self.n_fd += k - stage - 1
        self.resets.append(k)

    def halted(self, stage):
        self.n_r = max(self.n_r, 1)
        self.i_h = stage

    @property
    def mean_tieset(self):
        return float(np.mean(self.tie_sizes)) if self.tie_sizes else 0.0

    def consistent(self):
        return self.n_fs <= self.n_m <= self.n_r and \
            (self.i_h is None or self.i_h >= 2)

    def as_dict(self):
        return dict((name, getattr(self, name)) for name in COUNTERS)


def _uniform_sample(n, *keys):
    rng = stream(*keys)
    return Sample(rng.random(n), rng.random(n))


def profile_run(n, seed, algorithm="fastbcs2", tie_break="first"):
    """Counters of one search over n independent uniform pairs"""
    if n < 2:
        raise SizeError("Sample", n, 2)
    counters = ProfileCounters()
    policy = BcsPolicy(tie_break=tie_break, algorithm=algorithm,
                       seed=seed if tie_break == "random" else None)
    taupath(_uniform_sample(n, seed), policy, probe=counters)
    return counters


def profile_sweep(sizes, runs, seed, algorithm="fastbcs2"):
    """Mean counters per size and linear cost models of them against n

    Returns the frame of means and a dict mapping each counter to the
    `(intercept, slope)` of its least squares line.
    """
    rows = []
    for n in sizes:
        counters = [profile_run(n, seed * 1000003 + run, algorithm)
                    for run in range(runs)]
        row = {"n": n, "runs": runs}
        for name in COUNTERS:
            row[name] = float(np.mean([getattr(c, name) for c in counters]))
        rows.append(row)
    frame = pd.DataFrame(rows, columns=["n", "runs"] + COUNTERS)

    models = {}
    if len(frame) >= 2:
        for name in COUNTERS:
            slope, intercept = np.polyfit(frame["n"], frame[name], 1)
            models[name] = (float(intercept), float(slope))
    return frame, models


class DoublingReport(object):
    """Mean runtimes over doubling sizes with their growth exponents

    `ratios[i]` is `means[i + 1] / means[i]` and `exponents` its binary log.
    """
    def __init__(self, sizes, means, variances):
        self.sizes = list(sizes)
        self.means = np.asarray(means, dtype=float)
        self.variances = np.asarray(variances, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            self.ratios = self.means[1:] / self.means[:-1]
            self.exponents = np.log2(self.ratios)

    def frame(self):
        ratios = [float("nan")] + self.ratios.tolist()
        exponents = [float("nan")] + self.exponents.tolist()
        return pd.DataFrame({"n": self.sizes, "mean_seconds": self.means,
                             "variance": self.variances, "ratio": ratios,
                             "b": exponents})


def doubling_ratios(n_lo, n_hi, algorithm="fastbcs2", iterations=ITERATIONS,
                    seed=0, func=None, clock=time.perf_counter):
    """Time the search at n_lo, 2 n_lo, ... up to n_hi

    Each size gets one untimed warm up run, then `iterations` timed runs on
    fresh inputs.  `func` replaces the timed search.
    """
    if n_lo < 2:
        raise SizeError("Smallest size", n_lo, 2)
    if n_hi < 2 * n_lo:
        raise ArgumentError("The largest size must be at least twice the "
                            "smallest.")
    if iterations < 1:
        raise ArgumentError("At least one timed iteration is needed.")
    if func is None:
        policy = BcsPolicy(algorithm=algorithm)

        def func(s):
            return taupath(s, policy)

    sizes = []
    n = n_lo
    while n <= n_hi:
        sizes.append(n)
        n *= 2

    means, variances = [], []
    for n in sizes:
        func(_uniform_sample(n, seed, n, iterations))
        times = []
        for iteration in range(iterations):
            s = _uniform_sample(n, seed, n, iteration)
            start = clock()
            func(s)
            times.append(clock() - start)
        means.append(np.mean(times))
        variances.append(np.var(times))
        log.info("n=%d took %.4fs on average.", n, means[-1])
    return DoublingReport(sizes, means, variances)
