"""Error definitions

Every error the package raises is a `click.ClickException` so the command
line reports it cleanly, and each one carries the exit code the CLI should
end with.  Library callers can catch the two bases (`ArgumentError` and
`DataError`) without caring about click at all.
"""
import click

USAGE_EXIT = 1
DATA_EXIT = 2
INTERNAL_EXIT = 3


class ArgumentError(click.ClickException):
    """Raised when a call is made with arguments outside of its contract."""
    exit_code = USAGE_EXIT
    kind = "argument"


class SizeError(ArgumentError):
    """Raised when a sample or window is too small for the operation."""
    kind = "size"

    def __init__(self, what, size, minimum):
        msg = "{} has size {}, at least {} is required.".format(
            what, size, minimum)
        ArgumentError.__init__(self, msg)


class DataError(click.ClickException):
    """Raised when input data can not be used as provided."""
    exit_code = DATA_EXIT
    kind = "data"


class DegenerateInputError(DataError):
    """Raised when a margin has no variance to correlate."""
    kind = "degenerate"


class MalformedInputError(DataError):
    """Raised for unparseable input rows, pointing at the offending row."""
    kind = "malformed"

    def __init__(self, path, row, reason):
        msg = "`{}` row {}: {}".format(path, row, reason)
        DataError.__init__(self, msg)
        self.row = row


class InsufficientDataError(DataError):
    """Raised when too few usable pairs survive alignment."""
    kind = "insufficient-data"

    def __init__(self, name, available, minimum):
        msg = "`{}` has {} usable pairs, at least {} are required.".format(
            name, available, minimum)
        DataError.__init__(self, msg)
        self.available = available
