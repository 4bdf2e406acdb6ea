"""Utility function collection

Collection of helper functions shared between the command sets and the
numerical modules: command binding, table alignment, seeded random streams
and the bounded worker pool every parallel operation goes through.
"""
import concurrent.futures
import importlib
import logging
import os
import os.path

import click
import numpy as np

HOME = os.path.expanduser("~")

log = logging.getLogger(__name__)


def align_table(table_data, max_length=99999, min_length=1, seperator=" "):
    """Align columnar data for output

    Takes a 2 dimensional set of data consisting of rows of columns and formats
    each row to align in columns with each other.  The `max_length` argument
    allows for limiting how wide a column can be.

    NOTE: Uses the first row as an indicator of column number, if any rows are
    of different size, they will either error (if shorter) or truncate (if
    longer).
    """
    format_str = ""
    for column in range(len(table_data[0])):
        width = max(min_length, *[len(row[column]) for row in table_data])
        format_str += "{:" + str(min(max_length, width)) + "}" + seperator

    for row in table_data:
        yield format_str.format(*row).rstrip()


def bind_module(module_name, parent_cmd):
    """Binds commands to a parent subcommand from a module

    Uses the `__commands__` declaration of the module if there is one, falling
    back to every `click.Command` member otherwise.
    """
    module = importlib.import_module(module_name, __name__)
    if hasattr(module, "__commands__"):
        targets = getattr(module, "__commands__")
    else:
        targets = dir(module)

    for member_name in targets:
        member = getattr(module, member_name)
        if isinstance(member, click.Command):
            parent_cmd.add_command(member)


def cached_property(func):
    """Property decorator that creates a cached/memoized member variable

    Like the `@property` decorator but only determines the value once and then
    caches it in a `_` prefixed member variable.
    """
    cached_name = "_" + func.__name__

    def cached_caller(self):
        """decorated function"""
        if not hasattr(self, cached_name):
            setattr(self, cached_name, func(self))

        return getattr(self, cached_name)

    return property(cached_caller)


def stream(seed, *keys):
    """Counter based random stream for a seed and a position

    The stream for `(seed, keys...)` is the same no matter which worker or in
    which order it is drawn, which is what keeps replicated runs independent
    of the thread count.
    """
    entropy = [int(seed)] + [int(key) for key in keys]
    if any(value < 0 for value in entropy):
        raise ValueError("seeds and stream keys must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed, *keys):
    """A 63 bit integer seed drawn from the `(seed, keys...)` stream"""
    return int(stream(seed, *keys).integers(0, 2 ** 63 - 1))


def run_parallel(func, items, workers=1, processes=True):
    """Map `func` over `items` with a bounded pool, keeping item order

    A single worker runs in process so nothing has to be pickled.  Process
    pools need `func` to be a module level function.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    workers = min(workers, len(items))
    executor = concurrent.futures.ProcessPoolExecutor if processes \
        else concurrent.futures.ThreadPoolExecutor
    log.debug("Running %d items over %d workers.", len(items), workers)
    with executor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def chunked(items, size):
    """Split a sequence into consecutive chunks of at most `size`"""
    items = list(items)
    return [items[start:start + size] for start in range(0, len(items), size)]
