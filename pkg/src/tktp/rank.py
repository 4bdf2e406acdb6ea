"""Ranks, concordance and correlation

Everything downstream (tau-paths, the MAMLE curve, the screens) only looks at
the relative order of the observations, so a sample is reduced to its
concordance matrix: entry `[i, j]` is +1 when observations i and j order the
same way in both coordinates, -1 when they order in opposite ways, and 0 on the
diagonal or when either coordinate is tied.

The tau-path guarantees only hold for tie-free samples.  Tied pairs are kept
(as 0 entries) so real data stays usable, and `Sample.has_ties` lets callers
warn about it.
"""
import logging

import numpy as np
import scipy.stats

from .errors import ArgumentError, DegenerateInputError, SizeError

DEFAULT_MAX_N = 32000
BLOCK_ROWS = 1024

log = logging.getLogger(__name__)


def _frozen(values, dtype=None):
    values = np.array(values, dtype=dtype)
    values.setflags(write=False)
    return values


class Sample(object):
    """A bivariate sample with observation identifiers

    `x` and `y` are float arrays of the same length n >= 2, `ids` are distinct
    identifiers (1..n unless given).  Instances are immutable.
    """
    def __init__(self, x, y, ids=None):
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if len(x) != len(y):
            raise ArgumentError("x and y differ in length ({} != {})".format(
                len(x), len(y)))
        if len(x) < 2:
            raise SizeError("Sample", len(x), 2)
        if ids is None:
            ids = np.arange(1, len(x) + 1)
        ids = np.asarray(ids).ravel()
        if len(ids) != len(x):
            raise ArgumentError("ids differ in length from the sample "
                                "({} != {})".format(len(ids), len(x)))
        if len(np.unique(ids)) != len(ids):
            raise ArgumentError("Observation ids must be distinct.")

        self.x = _frozen(x)
        self.y = _frozen(y)
        self.ids = _frozen(ids)

    @classmethod
    def from_pairs(cls, pairs, ids=None):
        pairs = np.asarray(pairs, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ArgumentError("Pairs must be an (n, 2) array.")
        return cls(pairs[:, 0], pairs[:, 1], ids)

    @property
    def n(self):
        return len(self.x)

    def __len__(self):
        return self.n

    @property
    def has_ties(self):
        """Whether either margin holds a repeated value"""
        return len(np.unique(self.x)) < self.n or \
            len(np.unique(self.y)) < self.n

    def positions(self, ids):
        """Array positions of the given observation identifiers"""
        lookup = dict((value, position)
                      for position, value in enumerate(self.ids.tolist()))
        try:
            return np.array([lookup[value] for value in
                             np.asarray(ids).tolist()], dtype=np.intp)
        except KeyError as missing:
            raise ArgumentError("Unknown observation id {}.".format(missing))

    def subset(self, ids):
        """The sample restricted to (and ordered by) the given identifiers"""
        positions = self.positions(ids)
        return Sample(self.x[positions], self.y[positions],
                      self.ids[positions])

    def __eq__(self, other):
        return isinstance(other, Sample) and \
            np.array_equal(self.x, other.x) and \
            np.array_equal(self.y, other.y) and \
            np.array_equal(self.ids, other.ids)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "Sample(n={})".format(self.n)


class ConcordanceMatrix(object):
    """n x n matrix of pairwise concordance signs, stored as int8

    Rows and columns follow the order of `ids`, the identifiers of the sample
    it was built from.
    """
    def __init__(self, c, ids=None):
        c = np.asarray(c, dtype=np.int8)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ArgumentError("A concordance matrix must be square.")
        if ids is None:
            ids = np.arange(1, c.shape[0] + 1)
        self.c = _frozen(c, np.int8)
        self.ids = _frozen(ids)
        self._lookup = dict((value, position)
                            for position, value in enumerate(self.ids.tolist()))

    @property
    def n(self):
        return self.c.shape[0]

    def positions(self, idx):
        """Matrix positions of distinct observation identifiers"""
        idx = np.asarray(idx).ravel().tolist()
        if len(set(idx)) != len(idx):
            raise ArgumentError("Observation ids must be distinct.")
        try:
            return np.array([self._lookup[value] for value in idx],
                            dtype=np.intp)
        except KeyError as missing:
            raise ArgumentError("Unknown observation id {}.".format(missing))

    def total(self, positions=None):
        """Sum over all (ordered) entries of the (sub)matrix"""
        if positions is None:
            return int(self.c.sum(dtype=np.int64))
        block = self.c[np.ix_(positions, positions)]
        return int(block.sum(dtype=np.int64))

    def tau(self, positions=None):
        """Kendall tau of the (sub)matrix at the given positions"""
        k = self.n if positions is None else len(positions)
        if k < 2:
            raise SizeError("Concordance submatrix", k, 2)
        return self.total(positions) / float(k * (k - 1))

    def prefix_taus(self, order):
        """Exact Kendall tau of every prefix of `order` (positions)

        Entry k-1 holds the tau over the first k positions, with the single
        observation prefix set to 1 by convention.
        """
        order = np.asarray(order, dtype=np.intp)
        block = self.c[np.ix_(order, order)]
        # new concordance mass brought in by the k-th observation
        added = np.tril(block, -1).sum(axis=1, dtype=np.int64)
        totals = np.cumsum(added)
        k = np.arange(1, len(order) + 1, dtype=float)
        taus = np.ones(len(order))
        taus[1:] = 2.0 * totals[1:] / (k[1:] * (k[1:] - 1))
        return taus


def to_ranks(values):
    """Ranks 1..n, ties broken by original index order

    The rank of an element is one more than the number of strictly smaller
    elements, tied elements take consecutive ranks in the order they appear.
    """
    values = np.asarray(values, dtype=float).ravel()
    if len(values) < 2:
        raise SizeError("Rank input", len(values), 2)
    return scipy.stats.rankdata(values, method="ordinal").astype(np.int64)


def _signs(values, rows):
    """Sign of values[i] - values[j] for i in rows, all j, as int8"""
    left = values[rows][:, None]
    return (np.greater(left, values[None, :]).astype(np.int8) -
            np.less(left, values[None, :]).astype(np.int8))


def concordance_matrix(s, max_n=DEFAULT_MAX_N):
    """Concordance matrix of a sample

    `c[i, j] = sign((x_i - x_j) * (y_i - y_j))`, built in row blocks so the
    only n x n allocation is the int8 result.
    """
    if s.n > max_n:
        raise ArgumentError("Sample size {} exceeds the configured maximum "
                            "of {}.".format(s.n, max_n))
    if s.has_ties:
        log.warning("Sample has ties, tau-path guarantees assume tie-free "
                    "data.")

    c = np.empty((s.n, s.n), dtype=np.int8)
    for start in range(0, s.n, BLOCK_ROWS):
        rows = np.arange(start, min(start + BLOCK_ROWS, s.n))
        c[rows] = _signs(s.x, rows) * _signs(s.y, rows)
    return ConcordanceMatrix(c, s.ids)


def concordance_counts(s):
    """(concordant, discordant, tied) pair counts of a sample"""
    upper = np.triu(concordance_matrix(s).c, 1)
    concordant = int((upper == 1).sum())
    discordant = int((upper == -1).sum())
    pairs = s.n * (s.n - 1) // 2
    return concordant, discordant, pairs - concordant - discordant


def kendall_tau(s):
    """Kendall's tau as (A - D) / C(n, 2)"""
    return concordance_matrix(s).tau()


def subset_tau(c, idx):
    """Kendall tau over the submatrix induced by observation ids `idx`"""
    positions = c.positions(idx)
    if len(positions) < 2:
        raise SizeError("Subset", len(positions), 2)
    return c.tau(positions)


def _check_spread(values, name):
    if np.ptp(values) == 0:
        raise DegenerateInputError(
            "`{}` has zero variance, correlation is undefined.".format(name))


def pearson(s):
    """Product moment correlation of x and y"""
    _check_spread(s.x, "x")
    _check_spread(s.y, "y")
    return float(scipy.stats.pearsonr(s.x, s.y)[0])


def spearman(s):
    """Spearman correlation, the product moment correlation of the ranks

    Ties take their average rank.
    """
    _check_spread(s.x, "x")
    _check_spread(s.y, "y")
    return float(scipy.stats.spearmanr(s.x, s.y)[0])


def negate_y(s):
    """The sample with y sign flipped, screening it targets negative association"""
    return Sample(s.x, -s.y, s.ids)
