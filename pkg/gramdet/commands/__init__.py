"""Command line entry point: `gramdet <command> [options]`."""
import argparse
import sys
from importlib import import_module

from gramdet._version import extended_version
from gramdet.core.config_loader import load_config
from gramdet.core.exceptions import GramDetError


def _command_registry(args):
    # only -c matters before the command is known, it may register more commands
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("-c", dest="configfile", default=None)
    known, _ = pre.parse_known_args(args)
    return load_config(known.configfile)['gramdet']['commands']


def run(args):
    """Run one command and return its exit code."""
    if args and args[0] == '--version':
        print(extended_version)
        return 0

    try:
        registry = _command_registry(args[1:])
    except GramDetError as e:
        sys.stderr.write("gramdet: error: {}\n".format(e))
        return e.exit_code

    if not args or args[0] in ('-h', '--help') or args[0] not in registry:
        sys.stderr.write("usage: gramdet {{{}}} ... | --version\n".format(','.join(sorted(registry))))
        if args and args[0] not in ('-h', '--help'):
            sys.stderr.write("gramdet: error: unknown command '{}'\n".format(args[0]))
            return 2
        return 0 if args else 2

    module = import_module(registry[args[0]])
    _, command_cls = module.get_command()
    return command_cls(args[1:]).exit_code


def run_from_command_line(args=None):
    sys.exit(run(sys.argv[1:] if args is None else list(args)))
