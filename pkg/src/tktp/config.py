"""Config interaction definition

Defines helpful wrappers around the `ConfigParser` system and the resolution of
the run parameters every command shares.  A run parameter is looked up in this
order: the command line flag, the `TKTP_<NAME>` environment variable, the
`[tktp]` section of the config files, then the built in default.

Config settings::
    [tktp]
    alpha=0.05  # significance level of the reject boundary
    window=5  # MAMLE window width
    nsim=10000  # null simulations behind a reject boundary
    seed=0
    threads=1
    tie_break=first  # or `random`
    algorithm=fastbcs2  # or `fastbcs`
    cache_dir=~/.tktp/boundaries
    format=csv  # or `json`
    min_fraction=0.6
    jaccard_threshold=0.8
    min_pairs=30
    selection=prefix  # or `exceedances`
"""
import configparser
import os
import os.path

import click

from .errors import ArgumentError

SECTION = "tktp"
ENV_PREFIX = "TKTP_"


class Config(object):
    """ConfigParser wrapper

    Wraps the ConfigParser.ConfigParser class with some sane utility additions.
    These include default key values from missing config settings (instead of
    throwing an error) and existance checks when adding config files to be read
    from.
    """
    def __init__(self, *files):
        self.parser = configparser.ConfigParser()
        self.files = []

        for f in files:
            if f.startswith("~"):
                f = os.path.expanduser(f)
            elif not f.startswith("/"):
                f = os.path.join(os.getcwd(), f)

            if os.path.exists(f):
                self.parser.read(f)
                self.files.append(f)

    def get(self, section, key, default=None):
        """Value lookup with default value

        Performs the section::key lookup in the config file hiearchy and will
        return the specified default value if there is no key defined.
        """
        try:
            return self.parser.get(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError):
            return default

    def get_section(self, section):
        """Get dict of a section's key value pairs"""
        try:
            return dict(self.parser.items(section))
        except configparser.NoSectionError:
            return {}


def _choice(*options):
    def convert(value):
        value = str(value).strip().lower()
        if value not in options:
            raise ValueError("expected one of {}".format(", ".join(options)))
        return value
    return convert


def _flag(value):
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def _path(value):
    return os.path.expanduser(str(value)) if value else None


class RunConfig(object):
    """Validated run parameters shared by the library and the commands

    Defaults follow the TKTP wrapper constants (`WINDOW=5`, `NSIM=10000`,
    `SIGLVL=0.05`).  For samples around n=100 a window of 3 is the better
    choice; alpha=0.05 is recommended for n >= 500.
    """
    FIELDS = [
        # name, converter, default
        ("alpha", float, 0.05),
        ("window", int, 5),
        ("nsim", int, 10000),
        ("seed", int, 0),
        ("threads", int, 1),
        ("tie_break", _choice("first", "random"), "first"),
        ("algorithm", _choice("fastbcs", "fastbcs2"), "fastbcs2"),
        ("cache_dir", _path, None),
        ("format", _choice("csv", "json"), "csv"),
        ("negate", _flag, False),
        ("min_fraction", float, 0.60),
        ("jaccard_threshold", float, 0.8),
        ("min_pairs", int, 30),
        ("selection", _choice("prefix", "exceedances"), "prefix"),
        ("parallel_threshold", int, 2000),
        ("max_n", int, 32000),
    ]

    def __init__(self, **values):
        unknown = set(values) - set(name for name, _, _ in self.FIELDS)
        if unknown:
            raise ArgumentError("Unknown run parameter(s): {}".format(
                ", ".join(sorted(unknown))))

        for name, convert, default in self.FIELDS:
            value = values.get(name, default)
            try:
                value = convert(value) if value is not None else None
            except (TypeError, ValueError) as error:
                raise ArgumentError("Invalid `{}` value {!r}: {}".format(
                    name, value, error))
            setattr(self, name, value)

        self.validate()

    @classmethod
    def resolve(cls, config=None, environ=None, **flags):
        """Build a config from flags, environment, config files and defaults

        `flags` set to `None` count as not given on the command line.
        """
        environ = os.environ if environ is None else environ
        values = {}
        for name, _, _ in cls.FIELDS:
            value = flags.get(name)
            if value is None:
                value = environ.get(ENV_PREFIX + name.upper())
            if value is None and config is not None:
                value = config.get(SECTION, name)
            if value is not None:
                values[name] = value

        return cls(**values)

    def validate(self):
        """Range checks on the run parameters"""
        checks = [
            (0 < self.alpha < 1, "alpha must lie in (0, 1)"),
            (self.window >= 1, "window must be at least 1"),
            (self.nsim >= 1, "nsim must be at least 1"),
            (self.threads >= 1, "threads must be at least 1"),
            (self.seed >= 0, "seed must be non-negative"),
            (0 <= self.min_fraction <= 1, "min_fraction must lie in [0, 1]"),
            (0 <= self.jaccard_threshold < 1,
             "jaccard_threshold must lie in [0, 1)"),
            (self.min_pairs >= 2, "min_pairs must be at least 2"),
            (self.parallel_threshold >= 2,
             "parallel_threshold must be at least 2"),
            (self.max_n >= 2, "max_n must be at least 2"),
        ]
        for passed, message in checks:
            if not passed:
                raise ArgumentError(message)

    def replace(self, **values):
        """Copy of this config with some values swapped out"""
        current = self.as_dict()
        current.update(values)
        return RunConfig(**current)

    def as_dict(self):
        return dict((name, getattr(self, name)) for name, _, _ in self.FIELDS)

    def describe(self):
        """The TKTP parameters every report has to state"""
        return {
            "alpha": self.alpha,
            "window": self.window,
            "nsim": self.nsim,
            "seed": self.seed,
            "tie_break": self.tie_break,
            "algorithm": self.algorithm,
            "selection": self.selection,
        }

    def header(self, *values):
        """`#` comment line stating the report parameters

        `values` are leading `(name, value)` pairs, the TKTP parameters follow.
        """
        items = list(values) + [(name, getattr(self, name)) for name in
                                ("alpha", "window", "nsim", "seed")]
        return "# {}\n".format(" ".join(
            "{}={}".format(name, value) for name, value in items))

    def __eq__(self, other):
        return isinstance(other, RunConfig) and \
            self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "RunConfig({})".format(", ".join(
            "{}={!r}".format(k, v) for k, v in sorted(self.as_dict().items())))


def default_cache_dir():
    """Boundary cache location used by the commands"""
    return os.path.join(click.get_app_dir("tktp"), "boundaries")
