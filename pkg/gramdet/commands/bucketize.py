"""Turns a numeric series into a labelled dataset file."""
import io
import sys
from collections import OrderedDict

from gramdet.commands.base import CommandBase
from gramdet.core.exceptions import ShapeError
from gramdet.core.ingest import BucketizerSpec, Dataset, diff_series, quantile_bucketize, \
    read_series, save_dataset
from gramdet.core.kernels import ObservationSet


class Command(CommandBase):

    name = 'bucketize'
    description = 'Quantile-bucketizes a numeric series into a dataset file for score and rank'

    def add_arguments(self, parser):
        parser.add_argument("input", help="Single-column numeric series")
        parser.add_argument("--buckets", action="store", dest="buckets", type=int, default=None,
                            help="Number of quantile buckets")
        parser.add_argument("--diff", action="store_true", dest="diff", default=False,
                            help="Bucketize successive differences instead of the values")
        parser.add_argument("--observations", action="store", dest="observations", default=None,
                            metavar='file_name',
                            help="A second series, bucketized the same way with its own "
                                 "boundaries, written as the categorical observation column")

    def _labels(self, path, spec):
        series = read_series(path)
        if self.args.diff:
            series = diff_series(series)
        return quantile_bucketize(series, spec)

    def run(self):
        args = self.args
        section = self.config['ingest']
        spec = BucketizerSpec(args.buckets if args.buckets is not None else section['buckets'])
        report = self._labels(args.input, spec)
        self.log.info("Bucketized %s into %s buckets, occupancies %s", args.input, spec.buckets,
                      report.occurrences().tolist())

        observations = None
        if args.observations:
            obs = self._labels(args.observations, spec)
            if len(obs) != len(report):
                raise ShapeError("{} has {} values, {} has {}".format(
                    args.input, len(report), args.observations, len(obs)))
            observations = ObservationSet.categorical(obs.values, spec.buckets)

        dataset = Dataset(OrderedDict([(section['report_column'], report)]), observations,
                          observation_columns=('observation', ) if observations is not None else ())
        if args.output in (None, '-'):
            buffer = io.StringIO()
            save_dataset(buffer, dataset)
            sys.stdout.write(buffer.getvalue())
        else:
            save_dataset(args.output, dataset)
            self.summary("Wrote {} labelled records to {}".format(len(report), args.output))


def get_command():
    return 'bucketize', Command
