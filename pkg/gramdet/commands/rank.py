"""Ranks several datasets by score."""
import os

from gramdet.commands.base import CommandBase, add_dataset_arguments, add_scoring_arguments, \
    dataset_schema, scoring_options
from gramdet.core.exceptions import InputFileError, ShapeError
from gramdet.core.ingest import LabelMap, load_dataset, load_observations
from gramdet.core.kernels import resolve_spec
from gramdet.core.scoring import RankedReport, rank_reports, score_report


class Command(CommandBase):

    name = 'rank'
    description = 'Scores datasets identically and ranks them by descending score'

    def add_arguments(self, parser):
        parser.add_argument("inputs", nargs='+', help="Two or more dataset files")
        parser.add_argument("--observations",
                            action="store", dest="observations", default=None,
                            metavar='file_name',
                            help="Observation file shared by every dataset. Without it each "
                                 "dataset uses its own observation columns")
        add_dataset_arguments(parser)
        add_scoring_arguments(parser)

    def _load(self):
        label_map = LabelMap()
        schema = dataset_schema(self, observation_columns=() if self.args.observations else None)
        datasets = [load_dataset(path, schema, label_map) for path in self.args.inputs]
        # one id space across files, so every report has the same alphabet
        for dataset in datasets:
            dataset.with_alphabet(len(label_map), label_map.names)
        return datasets

    def run(self):
        args = self.args
        if len(args.inputs) < 2:
            raise InputFileError("rank needs at least two dataset files")
        datasets = self._load()
        kernel, estimator, repetitions = scoring_options(self)
        subsample = self.config['scoring']['median_subsample']
        names = [os.path.basename(d.path) for d in datasets]

        manifest = self.manifest()
        if args.observations:
            shared = load_observations(args.observations, args.variant or 'auto')
            manifest.add_input(args.observations)
            for dataset in datasets:
                if len(dataset.report) != len(shared):
                    raise ShapeError("{} has {} records, {} has {}".format(
                        dataset.path, len(dataset.report), args.observations, len(shared)))
            kernel = resolve_spec(kernel, shared, subsample)
            ranked = rank_reports([d.report for d in datasets], shared, kernel, estimator,
                                  self.seed, repetitions, names)
        else:
            for dataset in datasets:
                if dataset.observations is None:
                    raise InputFileError("no observation columns and no --observations file",
                                         dataset.path)
            kernel = resolve_spec(kernel, datasets[0].observations, subsample)
            scored = [RankedReport(i, names[i], score_report(d.report, d.observations, kernel,
                                                             estimator, self.seed, repetitions))
                      for i, d in enumerate(datasets)]
            ranked = sorted(scored, key=lambda r: -r.report.value)

        for dataset in datasets:
            manifest.add_input(dataset.path, dataset.digest)
        rows = [{'rank': position, 'name': r.name, 'path': datasets[r.index].path,
                 'score': r.report.to_dict()} for position, r in enumerate(ranked, start=1)]
        self.write(manifest, {'ranking': rows, 'label_names': list(datasets[0].label_names)})

        width = max(len(n) for n in names)
        lines = ["{:>4}  {:<{w}}  {:>14}".format('rank', 'dataset', 'score', w=width)]
        for row, r in zip(rows, ranked):
            flag = '  degenerate' if r.report.degenerate else ''
            lines.append("{:>4}  {:<{w}}  {:>14.6g}{}".format(row['rank'], r.name, r.report.value,
                                                             flag, w=width))
        self.summary('\n'.join(lines))


def get_command():
    return 'rank', Command
