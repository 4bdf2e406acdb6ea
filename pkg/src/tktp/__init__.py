"""Base definition for CLI application

Defines the top level command group, shared application context, sets up the
logging level, and defines the command modules to bind to the base group
definition.

Config settings::
    [default]
    debug=1  # equivalent to the `-d`//`--debug` flag on all calls
    verbosity=N  # equivalent to the number of `-v` flags set on all calls
"""
import logging
import os
import sys

import click

import tktp.log as tktp_log
import tktp.utils as utils

from tktp.config import Config, RunConfig, default_cache_dir

CONTEXT_SETTINGS = {
    "help_option_names": ["-h", "--help"],
}
LOCAL_CONFIG_FILE = ".tktp.ini"
USER_CONFIG_FILE = (click.get_app_dir("tktp") + ".ini").replace(utils.HOME, "~")
CONFIG_FILES = [USER_CONFIG_FILE, LOCAL_CONFIG_FILE]
COMMAND_MODULES = ["tktp.commands.paths", "tktp.commands.study",
                   "tktp.commands.screen"]
__version__ = "0.3.0"

logging.setLoggerClass(tktp_log.ClickLogger)
log = logging.getLogger(__name__)

from tktp.click_ext import SmartGroup, invoke  # pylint: disable=wrong-import-position


class Context(object):
    """Cached context collector for commands

    Meant to provide lazy definitions for various contextually shared objects
    that commands will want without the specifics of their instantiation or
    definition being distributed among the commands.
    """
    debug = False
    json = False

    @utils.cached_property
    def config(self):  # pylint: disable=no-self-use
        """(cached property) Contextual configuration"""
        return Config(*CONFIG_FILES)

    @utils.cached_property
    def environ(self):  # pylint: disable=no-self-use
        """(cached property) Environment the `TKTP_` overrides come from"""
        return os.environ

    def run_config(self, **flags):
        """Run parameters from flags, environment, config files and defaults"""
        return RunConfig.resolve(self.config, self.environ, **flags)

    def boundary_cache(self, run_config):
        """Boundary cache in the configured (or default) directory"""
        from tktp.boundary import BoundaryCache
        return BoundaryCache(run_config.cache_dir or default_cache_dir())

    def write(self, text, output=None):
        """Report text to the `output` file, stdout when not given"""
        if output:
            with open(output, "w") as f:
                f.write(text if text.endswith("\n") else text + "\n")
            log.info("Wrote `%s`.", output)
        else:
            click.echo(text.rstrip("\n"))


@click.group("tktp", context_settings=CONTEXT_SETTINGS, cls=SmartGroup)
@click.option("-v", "--verbose", count=True, help="Set verbose logging")
@click.option("-d", "--debug", is_flag=True, default=False)
@click.option("--json", "as_json", is_flag=True, default=False,
              help="Report errors as JSON on stderr")
@click.pass_obj
def tktp(context, verbose, debug, as_json):
    """Tau-path screening for associated subsamples"""
    verbose = verbose if verbose else \
        int(context.config.get("default", "verbosity", "2"))
    debug = debug if debug else context.config.get("default", "debug")

    log.setLevel(tktp_log.level_for(verbose, debug))
    if debug:
        log.use_debug_format()

    context.debug = bool(debug)
    context.json = as_json

    if debug:
        log.debug("Running in debug mode")


@tktp.command("version", short_help="Return the version of the installed tktp")
def version():
    """Subcommand for giving the version number."""
    log.echo("tktp version {}".format(__version__))


def bind_commands():
    for module_name in COMMAND_MODULES:
        utils.bind_module(module_name, tktp)


def run(args=None, context=None):
    """Run the command line, returning the exit code"""
    bind_commands()
    args = sys.argv[1:] if args is None else list(args)
    context = context or Context()
    return invoke(tktp, args, context, as_json="--json" in args,
                  debug="-d" in args or "--debug" in args)


def main():
    """Setup and call of the object"""
    sys.exit(run())


if __name__ == "__main__":
    main()
