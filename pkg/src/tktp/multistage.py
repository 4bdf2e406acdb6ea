"""Multistage ranking estimates along a tau-path

Reading the tau-path as the stages of a multistage ranking, stage j adds one
observation and the discordances it brings in are the stage penalty `V_j`.
Under the truncated geometric stage model the penalty takes value v in
0..m-1 (m = n - j + 1 objects still available) with probability
proportional to `r ** v`, and `theta = -log(r)` measures how strongly the two
rankings agree at that stage.  The moving average MLE (MAMLE) estimates theta
over sliding backward windows of `w` stages, and the stopping point is the
last stage the estimates still clear a null reject boundary.
"""
import logging

import numpy as np

from .config import RunConfig
from .errors import ArgumentError, SizeError
from .rank import Sample
from .taupath import BcsPolicy, MONOTONE_TOLERANCE, taupath
from .utils import chunked, derive_seed, run_parallel, stream

THETA_MAX = 10.0
R_LOW = 1e-6
R_HIGH = 1.0 - 1e-6
BISECTIONS = 40
SELECTIONS = ("prefix", "exceedances")

log = logging.getLogger(__name__)


class PenaltySequence(object):
    """Per stage discordance increments of a tau-path

    Arrays are indexed by stage - 2 and cover stages 2..n.  `raw` are the
    increments as computed, `v` the increments clamped into the truncated
    geometric support [0, m - 1] and `clamped` marks the stages where that
    changed the value.
    """
    def __init__(self, raw, m):
        self.raw = np.asarray(raw, dtype=float)
        self.m = np.asarray(m, dtype=np.int64)
        self.v = np.clip(self.raw, 0, self.m - 1)
        self.clamped = self.v != self.raw

    @property
    def n(self):
        return len(self.raw) + 1

    @property
    def stages(self):
        return np.arange(2, self.n + 1)

    @property
    def total(self):
        """Total discordance of the full sample, from the unclamped values"""
        return float(self.raw.sum())

    def window(self, j, w):
        """(v, m) over the backward window of stages j-w+1..j"""
        if not 2 <= j - w + 1 <= j <= self.n:
            raise ArgumentError("Window of {} stages ending at stage {} does "
                                "not fit stages 2..{}.".format(w, j, self.n))
        start = j - w + 1 - 2
        return self.v[start:j - 1], self.m[start:j - 1]


class MamleCurve(object):
    """MAMLE estimates for stages window+1..n"""
    def __init__(self, theta, window, n):
        self.theta = np.asarray(theta, dtype=float)
        self.window = window
        self.n = n
        if len(self.theta) != n - window:
            raise ArgumentError("A curve for n={} and window {} has {} stages, "
                                "not {}.".format(n, window, n - window,
                                                 len(self.theta)))

    @property
    def stages(self):
        return np.arange(self.window + 1, self.n + 1)

    def at(self, j):
        if not self.window < j <= self.n:
            raise ArgumentError("Stage {} is outside the curve ({}..{}).".format(
                j, self.window + 1, self.n))
        return float(self.theta[j - self.window - 1])

    def shifted(self, epsilon):
        return MamleCurve(np.minimum(self.theta + epsilon, THETA_MAX),
                          self.window, self.n)

    def __eq__(self, other):
        return isinstance(other, MamleCurve) and \
            self.window == other.window and self.n == other.n and \
            np.array_equal(self.theta, other.theta)

    def __ne__(self, other):
        return not self == other


class RejectBoundary(object):
    """Stage wise (1 - alpha) quantiles of null MAMLE estimates

    Shares the stage domain (window+1..n) of the curves it is compared with.
    """
    def __init__(self, n, window, alpha, nsim, q, seed, tie_break="first"):
        self.n = int(n)
        self.window = int(window)
        self.alpha = float(alpha)
        self.nsim = int(nsim)
        self.q = np.asarray(q, dtype=float)
        self.seed = int(seed)
        self.tie_break = tie_break
        if len(self.q) != self.n - self.window:
            raise ArgumentError("Boundary for n={} and window {} needs {} "
                                "quantiles, got {}.".format(
                                    self.n, self.window, self.n - self.window,
                                    len(self.q)))

    @property
    def stages(self):
        return np.arange(self.window + 1, self.n + 1)

    def at(self, j):
        return float(self.q[j - self.window - 1])

    def key(self):
        return (self.n, self.window, self.alpha, self.nsim, self.seed,
                self.tie_break)

    def __eq__(self, other):
        return isinstance(other, RejectBoundary) and \
            self.key() == other.key() and np.array_equal(self.q, other.q)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "RejectBoundary(n={}, window={}, alpha={}, nsim={}, " \
            "seed={})".format(self.n, self.window, self.alpha, self.nsim,
                              self.seed)


class TktpSelection(object):
    """Result of a TKTP screen

    `k_hat` is the stopping stage (0 when no association was found) and
    `selected` the ids of the selected observations.
    """
    def __init__(self, k_hat, selected, taupath, mamle, boundary=None,
                 exceed=None, selection="prefix"):
        self.k_hat = int(k_hat)
        self.selected = np.asarray(selected)
        self.taupath = taupath
        self.mamle = mamle
        self.boundary = boundary
        self.exceed = np.asarray([] if exceed is None else exceed, dtype=int)
        self.selection = selection

    @property
    def n(self):
        return self.taupath.n

    @property
    def fraction(self):
        return len(self.selected) / float(self.n)

    def as_dict(self):
        return {
            "n": self.n,
            "k_hat": self.k_hat,
            "selected": self.selected.tolist(),
            "fraction": self.fraction,
            "selection": self.selection,
            "exceedances": self.exceed.tolist(),
        }


def discordance_increments(tau):
    """Stage penalties of a tau-path

    `tau` is the length n prefix tau vector (entry k-1 holds T[k], the first
    entry is the stage one placeholder) or a `TauPathResult`.  The total
    discordance at stage k is `((1 - T[k]) / 2) * C(k, 2)`, the penalty of
    stage k its increase over stage k-1.
    """
    tau = np.asarray(getattr(tau, "tau", tau), dtype=float)
    if len(tau) < 2:
        raise SizeError("Tau vector", len(tau), 2)
    path = tau[1:]
    if np.any(np.abs(path) > 1 + MONOTONE_TOLERANCE):
        raise ArgumentError("Tau values must lie in [-1, 1].")
    if np.any(np.diff(path) > MONOTONE_TOLERANCE):
        raise ArgumentError("Tau vector is not non-increasing, penalties "
                            "would be negative.")

    n = len(tau)
    k = np.arange(2, n + 1, dtype=float)
    # discordance counts are multiples of 1/2 (tied pairs count half)
    totals = np.round((1 - path) / 2 * k * (k - 1) / 2 * 2) / 2
    raw = np.diff(totals, prepend=0.0)
    penalties = PenaltySequence(raw, n - k.astype(np.int64) + 1)
    if penalties.clamped.any():
        log.debug("Clamped %d of %d stage penalties into their support.",
                  int(penalties.clamped.sum()), len(raw))
    return penalties


def _expected_penalty(r, m):
    """Mean of the truncated geometric on 0..m-1 with ratio r"""
    return r / (1 - r) + m * np.exp(m * np.log(r)) / np.expm1(m * np.log(r))


def _mle_ratios(v, m):
    """Ratio estimates for the rows of (v, m) by bisection on the score

    The score of a window vanishes where the expected and observed penalty
    totals agree, and the expected total rises with r.
    """
    target = v.sum(axis=1)
    low = np.full(len(v), R_LOW)
    high = np.full(len(v), R_HIGH)

    def expected(r):
        return _expected_penalty(r[:, None], m).sum(axis=1)

    at_low = target <= expected(low)
    at_high = target >= expected(high)
    for _ in range(BISECTIONS):
        middle = (low + high) / 2
        above = expected(middle) > target
        high = np.where(above, middle, high)
        low = np.where(above, low, middle)

    r = (low + high) / 2
    r = np.where(at_low, R_LOW, r)
    return np.where(at_high & ~at_low, R_HIGH, r)


def _thetas(r):
    theta = np.clip(-np.log(r), 0, THETA_MAX)
    return np.where(r >= R_HIGH, 0.0, theta)


def truncated_geom_log_likelihood(r, v, m):
    """Log likelihood of window penalties at ratio r"""
    v = np.asarray(v, dtype=float)
    m = np.asarray(m, dtype=float)
    return float(np.sum(np.log1p(-r) - np.log1p(-r ** m) + v * np.log(r)))


def truncated_geom_mle(v, m):
    """theta estimate of one window of penalties `v` with supports `m`

    The ratio maximizing the truncated geometric likelihood is searched in
    [1e-6, 1 - 1e-6] and `-log(r)` is clamped into [0, 10].
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    m = np.atleast_1d(np.asarray(m, dtype=np.int64))
    if len(v) == 0:
        raise SizeError("Penalty window", 0, 1)
    if v.shape != m.shape:
        raise ArgumentError("Penalties and supports differ in length.")
    if np.any(m < 1):
        raise ArgumentError("Supports must hold at least one value.")
    if np.any(v < 0) or np.any(v > m - 1):
        raise ArgumentError("Penalties exceed their truncation range.")

    return float(_thetas(_mle_ratios(v[None, :], m[None, :]))[0])


def taupath_mamle(tau, window):
    """MAMLE curve over the backward windows of a tau-path

    Accepts the prefix tau vector or a `TauPathResult`; stage j of the curve
    uses the penalties of stages j-window+1..j.
    """
    tau = np.asarray(getattr(tau, "tau", tau), dtype=float)
    n = len(tau)
    if window < 1:
        raise ArgumentError("Window must be at least 1.")
    if window >= n:
        raise ArgumentError("Window {} does not fit a tau-path of {} "
                            "stages.".format(window, n))

    penalties = discordance_increments(tau)
    v = np.lib.stride_tricks.sliding_window_view(penalties.v, window)
    m = np.lib.stride_tricks.sliding_window_view(penalties.m, window)
    return MamleCurve(_thetas(_mle_ratios(v, m)), window, n)


def _null_thetas(job):
    """MAMLE curves of the null replicates in `job`"""
    n, window, seed, policy, replicates = job
    curves = []
    for replicate in replicates:
        rng = stream(seed, replicate)
        x = rng.permutation(n) + 1
        y = rng.permutation(n) + 1
        replicate_policy = policy.replace(
            seed=derive_seed(seed, replicate, 1), parallel_colsums=False)
        r = taupath(Sample(x, y), replicate_policy)
        curves.append(taupath_mamle(r.tau, window).theta)
    return np.array(curves)


def generate_reject_boundary(n, window, nsim, alpha, seed, policy=None,
                             workers=1):
    """Simulate the reject boundary for samples of size n

    Every replicate draws two independent uniform permutations from the
    stream `(seed, replicate)`, so the quantiles do not depend on `workers`.
    """
    if window < 1:
        raise ArgumentError("Window must be at least 1.")
    if n < window + 2:
        raise SizeError("Sample", n, window + 2)
    if nsim < 1:
        raise ArgumentError("nsim must be at least 1.")
    if not 0 < alpha < 1:
        raise ArgumentError("alpha must lie in (0, 1).")

    policy = policy or BcsPolicy()
    chunks = max(1, workers) * 4
    size = -(-nsim // chunks)
    jobs = [(n, window, seed, policy, replicates)
            for replicates in chunked(range(nsim), size)]
    log.info("Simulating %d null tau-paths of size %d.", nsim, n)
    thetas = np.vstack(run_parallel(_null_thetas, jobs, workers))

    q = np.quantile(thetas, 1 - alpha, axis=0)
    return RejectBoundary(n, window, alpha, nsim, q, seed, policy.tie_break)


def _check_domain(mamle, boundary):
    if mamle.n != boundary.n or mamle.window != boundary.window:
        raise ArgumentError(
            "MAMLE curve (n={}, window={}) and boundary (n={}, window={}) do "
            "not share a stage domain.".format(mamle.n, mamle.window,
                                               boundary.n, boundary.window))


def exceedances(mamle, boundary):
    """Stages where the curve lies strictly above the boundary"""
    _check_domain(mamle, boundary)
    return mamle.stages[mamle.theta > boundary.q]


def stopping_stage(exceed, n, alpha):
    """First exceedance after which few enough exceedances remain

    For the i-th (1 based) exceedance stage e_i, the stage qualifies when the
    count of later exceedances is at most `alpha * (n - e_i)`.
    """
    exceed = np.asarray(exceed, dtype=int)
    for i, stage in enumerate(exceed, 1):
        if len(exceed) - i <= alpha * (n - stage):
            return int(stage)
    return 0


def stopping_point(mamle, boundary, alpha=None):
    """Estimated stopping stage, 0 when nothing exceeds the boundary"""
    alpha = boundary.alpha if alpha is None else alpha
    return stopping_stage(exceedances(mamle, boundary), boundary.n, alpha)


def select(r, k_hat, mamle=None, boundary=None, selection="prefix"):
    """Observation ids selected at stopping stage `k_hat`

    `prefix` selects the first k_hat observations of the path, `exceedances`
    the observations at stages from k_hat on whose estimate exceeds the
    boundary.
    """
    if selection not in SELECTIONS:
        raise ArgumentError("Unknown selection `{}`.".format(selection))
    if k_hat == 0:
        return r.pi[:0]
    if selection == "prefix":
        return r.prefix(k_hat)

    stages = exceedances(mamle, boundary)
    stages = stages[stages >= k_hat]
    return r.pi[stages - 1]


def tktp(s, config=None, cache=None, probe=None, boundary=None):
    """Tau-path screen of a sample

    The reject boundary comes from `boundary` when given, else from the
    `cache` (anything with a `fetch_or_generate` method), else it is
    simulated for this call.
    """
    config = config or RunConfig()
    if s.n < config.window + 2:
        raise SizeError("Sample", s.n, config.window + 2)

    policy = BcsPolicy.from_config(config)
    r = taupath(s, policy, probe=probe, max_n=config.max_n)
    curve = taupath_mamle(r.tau, config.window)

    if boundary is None and cache is not None:
        boundary = cache.fetch_or_generate(s.n, config, policy=policy)
    elif boundary is None:
        boundary = generate_reject_boundary(
            s.n, config.window, config.nsim, config.alpha, config.seed,
            policy=policy, workers=config.threads)

    exceed = exceedances(curve, boundary)
    k_hat = stopping_stage(exceed, s.n, config.alpha)
    selected = select(r, k_hat, curve, boundary, config.selection)
    log.debug("Stopping stage %d with %d exceedances.", k_hat, len(exceed))
    return TktpSelection(k_hat, selected, r, curve, boundary, exceed,
                         config.selection)
