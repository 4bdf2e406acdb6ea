"""Reject boundary cache

Simulating a boundary takes `nsim` tau-path runs, so boundaries are stored
per parameter set and reused.  A cache file is a fixed header followed by the
quantiles::

    offset  size  field
    0       8     magic `TKTPQB\\0\\0`
    8       2     format version (uint16)
    10      4     n (uint32)
    14      4     window (uint32)
    18      8     alpha (float64)
    26      4     nsim (uint32)
    30      8     seed (uint64)
    38      1     tie break code (0 first, 1 random)
    39      16    package version, NUL padded ASCII
    55      8*(n-window)  q for stages window+1..n (float64)

All fields are little endian.  Files are written to a temporary name and
renamed into place, a file whose header does not match the request is
regenerated.
"""
import logging
import os
import os.path
import struct
import tempfile

import numpy as np

from . import __version__
from .multistage import RejectBoundary, generate_reject_boundary
from .taupath import BcsPolicy

MAGIC = b"TKTPQB\x00\x00"
FORMAT_VERSION = 1
HEADER = struct.Struct("<8sHIIdIQB16s")
TIE_CODES = {"first": 0, "random": 1}

log = logging.getLogger(__name__)


class CacheError(Exception):
    """Raised for cache files that can not be used."""


def _version_bytes():
    return __version__.encode("ascii")[:16]


def encode(boundary):
    """Bytes of a boundary in the cache file format"""
    header = HEADER.pack(
        MAGIC, FORMAT_VERSION, boundary.n, boundary.window, boundary.alpha,
        boundary.nsim, boundary.seed, TIE_CODES[boundary.tie_break],
        _version_bytes())
    return header + boundary.q.astype("<f8").tobytes()


def decode(data):
    """Boundary from cache file bytes"""
    if len(data) < HEADER.size:
        raise CacheError("truncated header")
    magic, version, n, window, alpha, nsim, seed, tie_code, package = \
        HEADER.unpack(data[:HEADER.size])
    if magic != MAGIC:
        raise CacheError("bad magic")
    if version != FORMAT_VERSION:
        raise CacheError("format version {}".format(version))
    if package.rstrip(b"\x00") != _version_bytes():
        raise CacheError("written by version {}".format(
            package.rstrip(b"\x00").decode("ascii", "replace")))

    q = np.frombuffer(data[HEADER.size:], dtype="<f8")
    if len(q) != n - window:
        raise CacheError("expected {} quantiles, found {}".format(
            n - window, len(q)))
    tie_break = dict((code, name) for name, code in TIE_CODES.items())
    return RejectBoundary(n, window, alpha, nsim, q.astype(float), seed,
                          tie_break.get(tie_code, "first"))


class BoundaryCache(object):
    """Directory of cached reject boundaries keyed by their parameters"""
    def __init__(self, directory):
        self.directory = os.path.expanduser(directory)

    def filename(self, n, window, alpha, nsim, seed, tie_break="first"):
        return os.path.join(
            self.directory, "q_n{}_w{}_a{!r}_nsim{}_seed{}_{}_v{}.bin".format(
                n, window, float(alpha), nsim, seed, tie_break, __version__))

    def load(self, n, window, alpha, nsim, seed, tie_break="first"):
        """Cached boundary for the parameters, `None` when missing or stale"""
        path = self.filename(n, window, alpha, nsim, seed, tie_break)
        if not os.path.exists(path):
            return None

        with open(path, "rb") as f:
            data = f.read()
        try:
            boundary = decode(data)
        except CacheError as error:
            log.warning("Ignoring boundary cache `%s`: %s.", path, error)
            return None

        if boundary.key() != (n, window, float(alpha), nsim, seed, tie_break):
            log.warning("Ignoring boundary cache `%s`: header does not match "
                        "its parameters.", path)
            return None

        log.debug("Boundary cache hit `%s`.", path)
        return boundary

    def save(self, boundary):
        """Write a boundary atomically, returns the file path"""
        if not os.path.isdir(self.directory):
            os.makedirs(self.directory)
        path = self.filename(*boundary.key())

        handle, temp_path = tempfile.mkstemp(dir=self.directory,
                                             suffix=".tmp")
        try:
            with os.fdopen(handle, "wb") as f:
                f.write(encode(boundary))
            os.replace(temp_path, path)
        except Exception:
            if os.path.exists(temp_path):
                os.remove(temp_path)
            raise
        return path

    def fetch_or_generate(self, n, config, policy=None):
        """Boundary for a sample size under a `RunConfig`"""
        policy = policy or BcsPolicy.from_config(config)
        boundary = self.load(n, config.window, config.alpha, config.nsim,
                             config.seed, policy.tie_break)
        if boundary is not None:
            return boundary

        boundary = generate_reject_boundary(
            n, config.window, config.nsim, config.alpha, config.seed,
            policy=policy, workers=config.threads)
        self.save(boundary)
        return boundary
