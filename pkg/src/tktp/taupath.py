"""Sequentially maximal tau-path construction

The search orders a sample so the Kendall tau over the first k observations is
non-increasing in k.  It works backwards from the full sample: at stage i the
observation with the smallest concordance column sum within the first i is
moved to position i (backward elimination).  When several observations tie
for the minimum, the tieset is recorded for the stage, and later stages check
whether swapping a recorded alternative in dominates the choice made
(tie logic); when it does the search takes a forward step back to that stage.

`fastbcs` recomputes the column sums of every stage (cubic), `fastbcs2` keeps
them up to date incrementally (quadratic).  Given the same tie-break policy
both return the same permutation and path.

The path is only guaranteed to be sequentially maximal for tie-free samples.
"""
import concurrent.futures
import logging

import numpy as np

from .errors import ArgumentError, SizeError
from .rank import DEFAULT_MAX_N, concordance_matrix
from .utils import stream

TIE_BREAKS = ("first", "random")
ALGORITHMS = ("fastbcs", "fastbcs2")
MONOTONE_TOLERANCE = 1e-12

log = logging.getLogger(__name__)


class BcsPolicy(object):
    """How the backward conditional search resolves choices

    `tie_break` is `first` (the first tied observation in path order) or
    `random` (uniform over the tieset from a stream seeded with `seed`).
    `parallel_colsums` spreads the column sum work of `fastbcs2` over
    `workers` threads once the stage size reaches `parallel_threshold`.
    """
    def __init__(self, tie_break="first", seed=None, parallel_colsums=False,
                 algorithm="fastbcs2", parallel_threshold=2000, workers=2):
        if tie_break not in TIE_BREAKS:
            raise ArgumentError("Unknown tie break `{}`.".format(tie_break))
        if algorithm not in ALGORITHMS:
            raise ArgumentError("Unknown algorithm `{}`.".format(algorithm))
        if tie_break == "random" and seed is None:
            raise ArgumentError("A random tie break needs a seed.")

        self.tie_break = tie_break
        self.seed = seed
        self.parallel_colsums = bool(parallel_colsums)
        self.algorithm = algorithm
        self.parallel_threshold = max(int(parallel_threshold), 2)
        self.workers = max(int(workers), 1)

    @classmethod
    def from_config(cls, config, seed=None):
        """Policy for a `RunConfig`, optionally with a derived seed"""
        return cls(tie_break=config.tie_break,
                   seed=config.seed if seed is None else seed,
                   parallel_colsums=config.threads > 1,
                   algorithm=config.algorithm,
                   parallel_threshold=config.parallel_threshold,
                   workers=config.threads)

    def replace(self, **values):
        current = dict(tie_break=self.tie_break, seed=self.seed,
                       parallel_colsums=self.parallel_colsums,
                       algorithm=self.algorithm,
                       parallel_threshold=self.parallel_threshold,
                       workers=self.workers)
        current.update(values)
        return BcsPolicy(**current)

    def picker(self):
        """Function choosing an index into a tieset of the given size"""
        if self.tie_break == "first":
            return lambda size: 0

        rng = stream(self.seed)
        return lambda size: int(rng.integers(size))


class TieLedger(object):
    """Per stage tiesets recorded during backward elimination

    Only stages with more than one tied observation are recorded.
    """
    def __init__(self):
        self.tiesets = {}

    def record(self, stage, members):
        if len(members) > 1:
            self.tiesets[stage] = frozenset(int(m) for m in members)

    def contains(self, stage, member):
        return member in self.tiesets.get(stage, ())

    def clear_through(self, stage):
        """Forget every tieset at or below `stage`"""
        for recorded in [s for s in self.tiesets if s <= stage]:
            del self.tiesets[recorded]

    def __len__(self):
        return len(self.tiesets)


class TauPathResult(object):
    """A tau-path ordering and its statistic

    `pi` holds observation ids in path order.  `tau` holds the Kendall tau of
    every prefix, `tau[k - 1]` being T[k]; the one observation prefix carries
    the conventional value 1, so for n = 5 it reads like
    `[1, T2, T3, T4, T5]`.  `halt` is the stage the search stopped at.
    """
    def __init__(self, pi, tau, halt=None):
        self.pi = np.asarray(pi)
        self.tau = np.asarray(tau, dtype=float)
        self.halt = halt
        self.pi.setflags(write=False)
        self.tau.setflags(write=False)

    @property
    def n(self):
        return len(self.pi)

    @property
    def path(self):
        """T[2..n]"""
        return self.tau[1:]

    def stage_tau(self, k):
        if not 1 <= k <= self.n:
            raise ArgumentError("Stage {} outside of 1..{}.".format(k, self.n))
        return float(self.tau[k - 1])

    def prefix(self, k):
        """The ids of the first k observations along the path"""
        return self.pi[:k]

    def __eq__(self, other):
        return isinstance(other, TauPathResult) and \
            np.array_equal(self.pi, other.pi) and \
            np.array_equal(self.tau, other.tau)

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "TauPathResult(pi={}, tau={})".format(
            self.pi.tolist(), np.round(self.tau, 3).tolist())


class _NoProbe(object):
    """Stand in for a profiling probe when none is attached"""
    def iteration(self):
        pass

    def tie(self, size):
        pass

    def membership(self):
        pass

    def forward(self, stage, k):
        pass

    def halted(self, stage):
        pass


class _BackwardSearch(object):
    """Shared stage loop of both search variants

    Works on matrix positions; `pi[p]` is the matrix position of the
    observation at path position p (0 based, stage i covers `pi[:i]`).
    """
    def __init__(self, matrix, policy, probe=None):
        self.c = matrix.c
        self.n = matrix.n
        self.pi = np.arange(self.n, dtype=np.intp)
        self.ledger = TieLedger()
        self.pick = policy.picker()
        self.policy = policy
        self.probe = probe or _NoProbe()

    def run(self):
        i = self.n
        halted = self.setup()
        while not halted:
            self.probe.iteration()
            colsum = self.column_sums(i)
            ties = np.flatnonzero(colsum == colsum.min())
            if len(ties) > 1:
                self.probe.tie(len(ties))
                self.ledger.record(i, self.pi[ties])
                chosen = ties[self.pick(len(ties))]
            else:
                chosen = ties[0]
            self.transpose(i - 1, chosen)
            self.eliminated(i)

            k = self.tie_logic(i)
            if k is not None:
                self.probe.forward(i, k)
                log.debug("Forward step from stage %d to stage %d.", i, k)
                self.forward(i, k)
                self.ledger.clear_through(k)
                i = k - 1
                continue

            i -= 1
            halted = i <= 2 or self.concordant(i)

        self.probe.halted(i)
        return self.pi, i

    def tie_logic(self, i):
        """Stage k whose recorded choice the stage i observation improves on"""
        member = self.pi[i - 1]
        hit = False
        for k in range(self.n, i, -1):
            if not self.ledger.contains(k, member):
                continue
            if not hit:
                self.probe.membership()
                hit = True

            rows = self.pi[:k]
            qi = np.cumsum(self.c[rows, member], dtype=np.int64)[i - 1:]
            swapped = rows.copy()
            swapped[[i - 1, k - 1]] = swapped[[k - 1, i - 1]]
            qk = np.cumsum(self.c[swapped, self.pi[k - 1]],
                           dtype=np.int64)[i - 1:]
            if np.all(qk >= qi) and np.any(qk > qi):
                return k
        return None

    def setup(self):
        return self.n <= 2 or self.concordant(self.n)

    def transpose(self, a, b):
        self.pi[[a, b]] = self.pi[[b, a]]

    def forward(self, i, k):
        self.transpose(i - 1, k - 1)

    def eliminated(self, i):
        pass

    def column_sums(self, i):
        raise NotImplementedError()

    def concordant(self, i):
        raise NotImplementedError()


class _FastBcs(_BackwardSearch):
    """Reference search, every stage sums its i x i submatrix"""
    def _block(self, i):
        prefix = self.pi[:i]
        return self.c[np.ix_(prefix, prefix)]

    def column_sums(self, i):
        return self._block(i).sum(axis=0, dtype=np.int64)

    def concordant(self, i):
        return int(self._block(i).sum(dtype=np.int64)) == i * (i - 1)


class _FastBcs2(_BackwardSearch):
    """Incremental search, column sums are maintained per path position

    Between stages `colsum[p]` for p < i holds the column sum of the
    observation at path position p over the first i rows; positions past the
    current stage keep their sum over the rows before them.
    """
    def __init__(self, matrix, policy, probe=None):
        _BackwardSearch.__init__(self, matrix, policy, probe)
        self.colsum = None
        self.pool = None
        if policy.parallel_colsums and policy.workers > 1 and \
                self.n >= policy.parallel_threshold:
            self.pool = concurrent.futures.ThreadPoolExecutor(
                max_workers=policy.workers)

    def run(self):
        try:
            return _BackwardSearch.run(self)
        finally:
            if self.pool is not None:
                self.pool.shutdown()

    def _split(self, size):
        step = -(-size // self.policy.workers)
        return [slice(start, min(start + step, size))
                for start in range(0, size, step)]

    def _parallel(self, size):
        return self.pool is not None and size >= self.policy.parallel_threshold

    def setup(self):
        if self._parallel(self.n):
            def block_sum(columns):
                return self.c[:, columns].sum(axis=0, dtype=np.int64)
            parts = list(self.pool.map(block_sum, self._split(self.n)))
            self.colsum = np.concatenate(parts)
        else:
            self.colsum = self.c.sum(axis=0, dtype=np.int64)
        return _BackwardSearch.setup(self)

    def column_sums(self, i):
        return self.colsum[:i]

    def concordant(self, i):
        return int(self.colsum[:i].sum()) == i * (i - 1)

    def transpose(self, a, b):
        _BackwardSearch.transpose(self, a, b)
        self.colsum[[a, b]] = self.colsum[[b, a]]

    def _subtract_row(self, position, size):
        """Take the row of the observation at `position` out of colsum[:size]"""
        row = self.c[self.pi[position]]
        if self._parallel(size):
            def update(columns):
                self.colsum[columns] -= row[self.pi[columns]]
            list(self.pool.map(update, self._split(size)))
        else:
            self.colsum[:size] -= row[self.pi[:size]]

    def eliminated(self, i):
        self._subtract_row(i - 1, i)

    def forward(self, i, k):
        # bring every position up to its sum over the first k rows
        rows = self.pi[i - 1:k]
        block = self.c[np.ix_(rows, self.pi[:k])].astype(np.int64)
        later = np.arange(i - 1, k)[:, None] >= np.arange(k)[None, :]
        self.colsum[:k] += (block * later).sum(axis=0)

        self.transpose(i - 1, k - 1)
        self._subtract_row(k - 1, k)


SEARCHES = {
    "fastbcs": _FastBcs,
    "fastbcs2": _FastBcs2,
}


def _run(search_cls, s, policy, probe, matrix, max_n):
    if s.n < 2:
        raise SizeError("Sample", s.n, 2)
    policy = policy or BcsPolicy()
    matrix = matrix if matrix is not None else concordance_matrix(s, max_n)

    order, halt = search_cls(matrix, policy, probe).run()
    tau = matrix.prefix_taus(order)
    steps = np.diff(tau[1:])
    if np.any(steps > MONOTONE_TOLERANCE):
        raise RuntimeError("Tau-path is not monotone at stage {}.".format(
            int(np.argmax(steps > MONOTONE_TOLERANCE)) + 3))

    return TauPathResult(matrix.ids[order], tau, halt)


def fastbcs(s, policy=None, probe=None, matrix=None, max_n=DEFAULT_MAX_N):
    """Tau-path by backward conditional search, recomputing column sums"""
    return _run(_FastBcs, s, policy, probe, matrix, max_n)


def fastbcs2(s, policy=None, probe=None, matrix=None, max_n=DEFAULT_MAX_N):
    """Tau-path by backward conditional search with incremental column sums"""
    return _run(_FastBcs2, s, policy, probe, matrix, max_n)


def taupath(s, policy=None, probe=None, matrix=None, max_n=DEFAULT_MAX_N):
    """Tau-path with the algorithm the policy names"""
    policy = policy or BcsPolicy()
    return _run(SEARCHES[policy.algorithm], s, policy, probe, matrix, max_n)


def verify_sequential_maximality(s, r, matrix=None):
    """Brute force check that a tau-path is sequentially maximal

    For every stage k from n down to 3 the first k-1 observations must reach
    the largest tau of any single observation removal from the first k, the
    stored taus must match the prefixes and the path must not increase.
    """
    matrix = matrix if matrix is not None else concordance_matrix(s)
    if sorted(np.asarray(r.pi).tolist()) != sorted(matrix.ids.tolist()):
        return False

    order = matrix.positions(r.pi)
    if not np.allclose(matrix.prefix_taus(order), r.tau, rtol=0, atol=1e-12):
        return False
    if np.any(np.diff(r.tau[1:]) > MONOTONE_TOLERANCE):
        return False

    for k in range(len(order), 2, -1):
        block = matrix.c[np.ix_(order[:k], order[:k])].astype(np.int64)
        total = int(block.sum())
        best = total - 2 * int(block.sum(axis=0).min())
        if total - 2 * int(block[-1].sum()) != best:
            return False
    return True
