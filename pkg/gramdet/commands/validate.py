"""Diagnoses reports against a ground-truth column."""
from itertools import permutations

from gramdet.commands.base import CommandBase, add_dataset_arguments, dataset_schema
from gramdet.core.dataset import MatrixClass, MatrixClassKind, OrderingKind, OrderingSpec, \
    class_member, decompose, hamming_det_bracket, hamming_distance, misreport_matrix, ordering_holds
from gramdet.core.exceptions import ParameterError
from gramdet.core.ingest import load_dataset


def report_diagnostics(truth, report, balance, delta):
    """Misreport matrix, trace, Hamming error and class memberships of one report."""
    counts = misreport_matrix(truth, report)
    parts = decompose(counts)
    classes = (MatrixClass(MatrixClassKind.NONPERM),
               MatrixClass(MatrixClassKind.REG),
               MatrixClass(MatrixClassKind.DOM),
               MatrixClass(MatrixClassKind.BALANCED, balance),
               MatrixClass(MatrixClassKind.BALANCED_DELTA, balance, delta))
    bracket = hamming_det_bracket(counts)
    return {
        'counts': counts.counts,
        'q': counts.q,
        'q_x': parts.q_x,
        'q_xhat': parts.q_xhat,
        'trace': float(counts.q.trace()),
        'hamming': hamming_distance(truth, report),
        'hamming_fraction': float(counts.hamming_fraction),
        'classes': {c.kind.value: class_member(counts, c) for c in classes},
        'det_bracket': None if bracket is None else list(bracket),
    }


class Command(CommandBase):

    name = 'validate'
    description = 'Reports misreport matrices, class memberships and reliability orderings'

    def add_arguments(self, parser):
        parser.add_argument("input", help="Dataset file with a ground-truth column")
        add_dataset_arguments(parser, multiple_reports=True)
        parser.add_argument("--balance", action="store", dest="balance", type=float, default=None,
                            help="Balance L for the balanced classes")
        parser.add_argument("--delta", action="store", dest="delta", type=float, default=None,
                            help="Hamming fraction bound for the balanced-delta class")
        parser.add_argument("--alpha", action="store", dest="alpha", type=float, default=1.0,
                            help="Margin factor of the Hamming ordering")

    def run(self):
        args = self.args
        section = self.config['validate']
        balance = args.balance if args.balance is not None else section['balance']
        delta = args.delta if args.delta is not None else section['delta']
        if balance < 1 or not 0 < delta <= 1:
            raise ParameterError("Need --balance >= 1 and --delta in (0, 1]")

        dataset = load_dataset(args.input, dataset_schema(self, require_truth=True,
                                                          observation_columns=()))
        truth = dataset.truth

        reports = {}
        for name, report in dataset.reports.items():
            diag = reports[name] = report_diagnostics(truth, report, balance, delta)
            self.summary("{}: trace {:.4g}, Hamming {}, classes {}".format(
                name, diag['trace'], diag['hamming'],
                ', '.join(k for k, v in diag['classes'].items() if v) or 'none'))

        specs = (OrderingSpec(OrderingKind.EXACT), OrderingSpec(OrderingKind.HAMMING, args.alpha),
                 OrderingSpec(OrderingKind.BLACKWELL))
        orderings = []
        for a, b in permutations(dataset.reports, 2):
            for spec in specs:
                verdict = ordering_holds(truth, dataset.reports[a], dataset.reports[b], spec)
                entry = {'better': a, 'worse': b, 'ordering': spec.kind.value, 'holds': verdict.holds}
                if verdict.witness is not None and verdict.witness.t is not None:
                    entry['garbling'] = verdict.witness.t
                orderings.append(entry)
                if verdict.holds:
                    self.summary("{} > {} under the {} ordering".format(a, b, spec.kind.value))

        manifest = self.manifest()
        manifest.add_input(dataset.path, dataset.digest)
        self.write(manifest, {'label_mapping': dataset.metadata['label_mapping'],
                              'balance': balance, 'delta': delta,
                              'reports': reports, 'orderings': orderings})


def get_command():
    return 'validate', Command
