"""Scores one dataset file."""
from gramdet.commands.base import CommandBase, add_dataset_arguments, add_scoring_arguments, \
    dataset_schema, scoring_options
from gramdet.core.exceptions import InputFileError
from gramdet.core.ingest import load_dataset
from gramdet.core.kernels import resolve_spec
from gramdet.core.scoring import score_report


def dataset_summary(dataset):
    obs = dataset.observations
    return {'path': dataset.path,
            'sha256': dataset.digest,
            'n': len(dataset.report),
            'd': dataset.d,
            'label_mapping': dataset.metadata['label_mapping'],
            'observations': None if obs is None else {'variant': obs.variant.value, 'k': obs.k}}


def describe(report):
    text = "score={:.6g} ({}, kernel {}, N={})".format(
        report.value, report.estimator.value, report.kernel, report.n)
    if report.std_error is not None:
        text += " std_error={:.3g} over {} draws".format(report.std_error, report.repetitions)
    if report.degenerate:
        text += " DEGENERATE: a reported label occurs fewer than {} times".format(
            2 if report.estimator.value == 'stratified' else 1)
    return text


class Command(CommandBase):

    name = 'score'
    description = 'Computes the Gram determinant reliability score of a dataset'

    def add_arguments(self, parser):
        parser.add_argument("input", help="Dataset file with report and observation columns")
        add_dataset_arguments(parser)
        add_scoring_arguments(parser)

    def run(self):
        dataset = load_dataset(self.args.input, dataset_schema(self))
        if dataset.observations is None:
            raise InputFileError("no observation columns", self.args.input)
        kernel, estimator, repetitions = scoring_options(self)
        kernel = resolve_spec(kernel, dataset.observations, self.config['scoring']['median_subsample'])

        report = score_report(dataset.report, dataset.observations, kernel, estimator,
                              self.seed, repetitions)
        self.log.info("Scored %s: %s", dataset.path, report.value)

        manifest = self.manifest()
        manifest.add_input(dataset.path, dataset.digest)
        self.write(manifest, {'dataset': dataset_summary(dataset), 'score': report.to_dict()})
        self.summary(describe(report))


def get_command():
    return 'score', Command
