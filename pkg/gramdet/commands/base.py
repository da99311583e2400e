"""Shared argument handling, logging setup and error reporting for commands."""
import argparse
import logging
import sys

from gramdet._version import extended_version
from gramdet.core.config_loader import default_seed, load_config, string_to_list
from gramdet.core.exceptions import GramDetError
from gramdet.core.ingest import DatasetSchema
from gramdet.core.kernels import KernelSpec, configure_kernels
from gramdet.core.logging_formatters import JSONFormatter
from gramdet.core.policy import configure_policies
from gramdet.core.results import RunManifest, write_results
from gramdet.core.scoring import Estimator

CONSOLE_FORMAT = '%(asctime)s.%(msecs)03d : %(levelname)s [%(name)s] %(message)s'
FILE_FORMAT = '%(asctime)s : %(levelname)s : %(name)s : %(message)s'


class CommandBase:

    """Parses arguments, configures logging and runs the command.

    Subclasses set `name` and `description`, add their own arguments in
    add_arguments() and do their work in run(). The exit code ends up in
    self.exit_code: 0 on success, the error's exit_code for a GramDetError.
    """

    name = None
    description = None

    def __init__(self, args):
        self.log = logging.getLogger(self.name.capitalize() + 'Command')
        parser = argparse.ArgumentParser(prog='gramdet ' + self.name, description=self.description)

        parser.add_argument("-c",
                            action="store", dest="configfile", default=None,
                            metavar='config_file',
                            help="A YAML config file merged over the packaged defaults")

        parser.add_argument("-o",
                            action="store", dest="output", default=None,
                            metavar='file_name',
                            help="Where to write the results. Default is stdout")

        parser.add_argument("--seed",
                            action="store", dest="seed", type=int, default=None,
                            help="Master seed. Defaults to $GRAMDET_SEED, then the config")

        parser.add_argument("-l",
                            action="store", dest="logfile", default=None,
                            metavar='file_name',
                            help="The name (and path) of the log file")

        parser.add_argument("--json-logging",
                            action="store_true", dest="jsonlogging", default=False,
                            help="Write the log file as one JSON object per line")

        parser.add_argument("-v",
                            action="store_const", dest="loglevel", const=logging.DEBUG,
                            default=logging.INFO, help="Enables verbose logging to the log file")

        parser.add_argument("-V",
                            action="store_const", dest="consoleloglevel", const=logging.DEBUG,
                            default=logging.WARNING, help="Enables verbose logging to the console")

        self.add_arguments(parser)
        try:
            self.args = parser.parse_args(args)
        except SystemExit as e:
            self.exit_code = e.code if isinstance(e.code, int) else 2
            return

        self._handlers = []
        self._setup_logging()
        try:
            self.exit_code = self._run()
        finally:
            root = logging.getLogger('')
            for handler in self._handlers:
                root.removeHandler(handler)
                handler.close()

    def add_arguments(self, parser):
        pass

    def run(self):
        raise NotImplementedError

    def _setup_logging(self):
        args = self.args
        root = logging.getLogger('')
        levels = [args.consoleloglevel]

        if args.logfile:
            file_log = logging.FileHandler(args.logfile, mode='a', encoding='utf-8')
            file_log.setLevel(args.loglevel)
            if args.jsonlogging:
                file_log.setFormatter(JSONFormatter())
            else:
                file_log.setFormatter(logging.Formatter(FILE_FORMAT))
            self._handlers.append(file_log)
            levels.append(args.loglevel)

        # define a Handler which writes WARNING messages or higher to sys.stderr
        console = logging.StreamHandler(sys.stderr)
        console.setLevel(args.consoleloglevel)
        console.setFormatter(logging.Formatter(CONSOLE_FORMAT, "%H:%M:%S"))
        self._handlers.append(console)

        for handler in self._handlers:
            root.addHandler(handler)
        root.setLevel(min(levels))

    def _run(self):
        try:
            self.log.info(extended_version)
            self.config = load_config(self.args.configfile)
            configure_kernels(self.config['gramdet']['kernel_modules'])
            configure_policies(self.config['gramdet']['policy_modules'])
            self.seed = self.args.seed if self.args.seed is not None else default_seed(self.config)
            self.run()
        except GramDetError as e:
            self.log.error(str(e))
            sys.stderr.write("gramdet {}: error: {}\n".format(self.name, e))
            return e.exit_code
        except Exception as e:  # noqa
            logging.exception(str(e))
            raise
        return 0

    def manifest(self):
        flags = {k: v for k, v in vars(self.args).items()
                 if k not in ('loglevel', 'consoleloglevel')}
        return RunManifest(self.name, flags, self.seed)

    def write(self, manifest, body):
        write_results(self.args.output, manifest, body, self.config['gramdet']['results_indent'])

    def summary(self, text):
        """Human readable summary: stdout when results go to a file, else stderr."""
        stream = sys.stdout if self.args.output not in (None, '-') else sys.stderr
        stream.write(text + '\n')


def add_dataset_arguments(parser, multiple_reports=False):
    if multiple_reports:
        parser.add_argument("--report-column",
                            action="append", dest="report_column", default=None,
                            help="A reported-label column. Repeat for several reports")
    else:
        parser.add_argument("--report-column",
                            action="store", dest="report_column", default=None,
                            help="Name of the reported-label column")

    parser.add_argument("--truth-column",
                        action="store", dest="truth_column", default=None,
                        help="Name of the ground-truth label column")

    parser.add_argument("--observation-columns",
                        action="store", dest="observation_columns", default=None,
                        help="Comma separated observation column names. Default is every "
                             "column that is not a label column")

    parser.add_argument("--variant",
                        action="store", dest="variant", default=None,
                        choices=('auto', 'categorical', 'embedding'),
                        help="Observation variant. auto treats one column as categorical, "
                             "several as an embedding")


def add_scoring_arguments(parser):
    parser.add_argument("--kernel",
                        action="store", dest="kernel", default=None,
                        help="delta | linear | rbf[:SIGMA] | pseudo-posterior")

    parser.add_argument("--estimator",
                        action="store", dest="estimator", default=None,
                        choices=('plugin', 'plug-in', 'stratified'),
                        help="Score estimator")

    parser.add_argument("--repetitions",
                        action="store", dest="repetitions", type=int, default=None,
                        help="Independent stratified draws to average")


def dataset_schema(command, **overrides):
    args = command.args
    columns = None
    if args.observation_columns:
        columns = tuple(c.strip() for c in args.observation_columns.split(',') if c.strip())
    values = dict(truth_column=args.truth_column, variant=args.variant, observation_columns=columns)
    if args.report_column:
        values['report_columns'] = tuple(string_to_list(args.report_column))
    values.update(overrides)
    return DatasetSchema.from_config(command.config, **values)


def scoring_options(command):
    """(KernelSpec, Estimator, repetitions) from flags over the scoring config section."""
    section = command.config['scoring']
    args = command.args
    kernel = KernelSpec.parse(args.kernel or section['kernel'])
    estimator = Estimator.parse(args.estimator or section['estimator'])
    repetitions = args.repetitions if args.repetitions is not None else section['repetitions']
    return kernel, estimator, repetitions
