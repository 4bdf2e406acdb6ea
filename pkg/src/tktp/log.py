"""Log output wrapper

Wraps log output to allow for dictating log levels and provide some helpers for
pretty printing output to the command line.  Log records are written to
stderr, report output (`echo`) to stdout, so a CSV or JSON report can be piped
without the chatter mixed in.
"""
import contextlib
import logging
import re
import sys

import click

from colorama import Fore, init

init()

SUBSTITUTIONS = [
    (re.compile(r"\`([^\`]*)\`"), Fore.CYAN + r"\1" + Fore.RESET),
]
VERBOSITY_LEVEL = [
    logging.CRITICAL,
    logging.ERROR,
    logging.WARNING,
    logging.INFO,
    logging.DEBUG,
]


def _format(msg):
    """Format message using clean substitutions

    These use some colorama options to fix emphasis or other markings for a
    richer output format.
    """
    for pattern, replace in SUBSTITUTIONS:
        msg = re.sub(pattern, replace, msg)
    return msg


def level_for(verbose, debug=False):
    """Resolve the logging level for a `-v` count and debug flag"""
    if debug:
        return logging.DEBUG
    return VERBOSITY_LEVEL[min(max(int(verbose), 0), len(VERBOSITY_LEVEL) - 1)]


class ClickFormatter(logging.Formatter):
    """Click specific formatter to allow nice console output

    Plugs into the built in logging module and colours the level names.
    """
    DEFAULT_FORMAT = "%(levelname)s - %(message)s"
    DEBUG_FORMAT = "%(levelname)s:%(name)s(%(filename)s:%(lineno)d) - %(message)s"
    COLORS = {
        logging.CRITICAL: Fore.RED,
        logging.ERROR: Fore.RED,
        logging.WARNING: Fore.YELLOW,
        logging.INFO: Fore.GREEN,
        logging.DEBUG: Fore.WHITE,
    }
    ALIASES = {
        logging.CRITICAL: "CRIT",
        logging.ERROR: "ERR",
        logging.WARNING: "WARN",
        logging.INFO: "INFO",
        logging.DEBUG: "DEBUG",
    }

    def __init__(self, fmt=None, **kwargs):
        if not fmt:
            fmt = self.DEFAULT_FORMAT

        logging.Formatter.__init__(self, fmt=fmt, **kwargs)

    def format(self, record):
        msg = _format(record.getMessage())
        record = logging.makeLogRecord(dict(record.__dict__, msg=msg, args=()))
        record.levelname = (
            self.COLORS.get(record.levelno, "") +
            self.ALIASES.get(record.levelno, record.levelname) +
            Fore.RESET
        )
        return logging.Formatter.format(self, record)


class ClickLogger(logging.Logger):
    """Extends and defaults the logging output

    Only the package root logger gets a handler, the module loggers below it
    propagate up to it.
    """
    def __init__(self, *args, **kwargs):
        logging.Logger.__init__(self, *args, **kwargs)

        if "." not in self.name:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(ClickFormatter())
            self.addHandler(handler)
            self.propagate = False

    def use_debug_format(self):
        """Switch every handler to the location carrying format"""
        for handler in self.handlers:
            handler.setFormatter(ClickFormatter(ClickFormatter.DEBUG_FORMAT))

    @classmethod
    def echo(cls, msg):
        """Simple print wrapper for report output on stdout
        """
        click.echo(_format(msg))

    @contextlib.contextmanager
    def report_step(self, msg, debug=None):
        """Context wrapper for reporting a long running step

        Prints the step text to stderr and then a done or error suffix
        depending on whether the context raised.  Errors are always re-raised,
        with `debug` set the suffix is skipped so the traceback stays intact.
        """
        click.echo(_format(msg) + "...", nl=False, err=True)
        try:
            yield
        except Exception:
            if not debug:
                click.echo(Fore.RED + "error" + Fore.RESET, err=True)
            raise
        click.echo(Fore.GREEN + "done" + Fore.RESET, err=True)
