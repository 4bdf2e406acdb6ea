"""Extensions of click objects

Prefix resolution of subcommands, the run parameter options every command
shares, and the exit code mapping the top level entry point applies.
"""
import json
import logging
import traceback

import click

from .errors import INTERNAL_EXIT, USAGE_EXIT

log = logging.getLogger(__name__)

RUN_OPTIONS = {
    "alpha": (["--alpha"], dict(type=float, help="Significance level of the "
                                "reject boundary (default 0.05)")),
    "window": (["-w", "--window"], dict(type=int, help="MAMLE window width "
                                        "(default 5, 3 suits n around 100)")),
    "nsim": (["--nsim"], dict(type=int, help="Null simulations behind a "
                              "boundary (default 10000)")),
    "seed": (["--seed"], dict(type=int, help="Seed of every random stream")),
    "threads": (["-t", "--threads"], dict(type=int, help="Worker count")),
    "tie_break": (["--tie-break"], dict(type=click.Choice(["first", "random"]),
                                        help="Tieset choice policy")),
    "algorithm": (["--algo", "algorithm"],
                  dict(type=click.Choice(["fastbcs", "fastbcs2"]),
                       help="Tau-path search variant")),
    "negate": (["--negate/--no-negate"], dict(help="Screen for negative "
                                              "association")),
    "min_fraction": (["--min-fraction"], dict(type=float, help="Selected "
                                              "fraction a series needs to "
                                              "pass (default 0.6)")),
    "jaccard_threshold": (["--jaccard-threshold"],
                          dict(type=float, help="Complete linkage J* "
                               "(default 0.8)")),
    "min_pairs": (["--min-pairs"], dict(type=int, help="Fewest usable pairs "
                                        "a series may have (default 30)")),
    "selection": (["--selection"], dict(type=click.Choice(["prefix",
                                                           "exceedances"]),
                                        help="Selected set semantics")),
    "cache_dir": (["--cache-dir"], dict(metavar="DIR", help="Boundary cache "
                                        "directory")),
    "format": (["-f", "--format"], dict(type=click.Choice(["csv", "json"]),
                                        help="Report format")),
}


def run_options(*names):
    """Decorator adding the named run parameter options to a command

    Every option defaults to `None` so unset flags fall through to the
    environment, config files and defaults.
    """
    def decorator(func):
        for name in reversed(names):
            flags, settings = RUN_OPTIONS[name]
            func = click.option(*flags, default=None, **settings)(func)
        return func
    return decorator


def find_unique_short(group, context, command_name):
    """Shorthand resolution
    Attempt to determine a shorthand expansion for a command, this will try and
    see if there is a unique command that starts with the `command_name` value
    and return it if there is, otherwise will return the options (`None` for
    a complete miss).
    """
    possible_commands = [command for command in group.list_commands(context)
                         if command.startswith(command_name)]

    if len(possible_commands) == 1:
        return click.Group.get_command(group, context, possible_commands[0])

    return possible_commands if possible_commands else None


class SmartGroup(click.Group):
    """Group resolving unique command prefixes (`tktp sim` runs `simulate`)"""
    def get_command(self, ctx, cmd_name):
        command = click.Group.get_command(self, ctx, cmd_name)
        if command is not None:
            return command

        command = find_unique_short(self, ctx, cmd_name)
        if isinstance(command, list):
            ctx.fail(
                "`{}` is ambiguous and matched multiple commands: {}".format(
                    cmd_name, ", ".join(command)))

        return command


def _report(kind, message, exit_code, as_json):
    if as_json:
        click.echo(json.dumps({"error": kind, "message": message,
                               "exit_code": exit_code}), err=True)
    else:
        click.echo("Error: {}".format(message), err=True)


def invoke(command, args, obj, as_json=False, debug=False):
    """Run a command outside of click's standalone mode, returning its exit code

    Usage errors end with 1, package errors with the code they carry and
    anything else with 3.
    """
    try:
        command.main(args=args, obj=obj, standalone_mode=False,
                     prog_name="tktp")
    except click.exceptions.Exit as done:
        return done.exit_code
    except click.exceptions.Abort:
        _report("aborted", "Aborted.", USAGE_EXIT, as_json)
        return USAGE_EXIT
    except click.UsageError as error:
        if as_json:
            _report("usage", error.format_message(), USAGE_EXIT, True)
        else:
            error.show()
        return USAGE_EXIT
    except click.ClickException as error:
        exit_code = error.exit_code or USAGE_EXIT
        _report(getattr(error, "kind", "usage"), error.format_message(),
                exit_code, as_json)
        return exit_code
    except Exception as error:  # pylint: disable=broad-except
        if debug:
            traceback.print_exc()
        _report("internal", str(error) or error.__class__.__name__,
                INTERNAL_EXIT, as_json)
        return INTERNAL_EXIT
    return 0
