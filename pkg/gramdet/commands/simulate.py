"""Runs a synthetic simulation batch."""
import math
import os
import sys

import psutil

from gramdet.commands.base import CommandBase
from gramdet.core.baselines_report import compare_scores
from gramdet.core.config_loader import string_to_list
from gramdet.core.exceptions import ParameterError
from gramdet.core.simulate import TrialConfig, TrialRunner, ranking_study, score_error_correlation


class Command(CommandBase):

    name = 'simulate'
    description = 'Scores synthetic datasets corrupted at increasing levels'

    def add_arguments(self, parser):
        parser.add_argument("-d", action="store", dest="d", type=int, default=None,
                            help="Number of labels")
        parser.add_argument("-k", action="store", dest="k", type=int, default=None,
                            help="Observation alphabet size, or embedding width")
        parser.add_argument("-n", action="store", dest="n", type=int, default=None,
                            help="Records per dataset")
        parser.add_argument("--levels", action="store", dest="levels", default=None,
                            help="Comma separated corruption levels")
        parser.add_argument("--policies", action="store", dest="policies", default=None,
                            help="Comma separated corruption policies")
        parser.add_argument("--trials", action="store", dest="trials", type=int, default=None,
                            help="Trials per (policy, level) cell")
        parser.add_argument("--kernel", action="store", dest="kernel", default=None,
                            help="delta | linear | rbf[:SIGMA] | pseudo-posterior")
        parser.add_argument("--estimator", action="store", dest="estimator", default=None,
                            choices=('plugin', 'plug-in', 'stratified'))
        parser.add_argument("--observations", action="store", dest="observations", default=None,
                            choices=('categorical', 'gaussian'),
                            help="Categorical draws from a random experiment, or Gaussian "
                                 "embeddings around separated class means")

        parser.add_argument("--workers",
                            action="store", dest="workers", type=int, default=None,
                            help="Worker processes. 0 uses one per physical core")

        parser.add_argument("--compare",
                            action="store", dest="compare", default=None,
                            metavar='kinds',
                            help="Comma separated baseline scores to compare, e.g. "
                                 "topk-volume:4,max-correlation,kl-mi,chi2-mi")

        parser.add_argument("--ranking-study",
                            action="store", dest="study_sizes", default=None,
                            metavar='sizes',
                            help="Comma separated dataset sizes. Reports how often the score "
                                 "ranking of fresh datasets matches the corruption order")

        parser.add_argument("--datasets",
                            action="store", dest="datasets", type=int, default=100,
                            help="Fresh datasets per size for --ranking-study")

        parser.add_argument("--nice",
                            action="store_true", dest="nice", default=False,
                            help="Lower the process priority")

    def trial_config(self):
        args = self.args
        return TrialConfig.from_config(
            self.config, d=args.d, k=args.k, n=args.n, levels=args.levels,
            policies=args.policies, trials=args.trials, kernel=args.kernel,
            estimator=args.estimator, observations=args.observations, workers=args.workers,
            seed=self.seed)

    def run(self):
        args = self.args
        if args.nice:
            p = psutil.Process(os.getpid())
            if sys.platform == "win32":
                p.nice(psutil.BELOW_NORMAL_PRIORITY_CLASS)
            else:
                p.nice(10)

        config = self.trial_config()
        manifest = self.manifest()

        if args.study_sizes:
            if args.datasets < 1:
                raise ParameterError("--datasets must be >= 1")
            sizes = [int(n) for n in string_to_list(args.study_sizes)]
            study = ranking_study(config, sizes, args.datasets)
            self.write(manifest, {'config': config.to_dict(),
                                  'ranking_study': {str(n): v for n, v in study.items()}})
            for n, v in study.items():
                self.summary("N={}: matched p {:.3f}, Hamming {:.3f}, l2 {:.3f} over {} datasets".format(
                    n, v['p'], v['hamming'], v['l2'], v['datasets']))
            return

        if args.compare:
            result = compare_scores(config, string_to_list(args.compare))
            self.write(manifest, result.to_dict())
            for kind in result.kinds:
                for policy in config.policies:
                    means = ', '.join('{:.4g}'.format(m) for m in result.means(kind, policy))
                    self.summary("{} / {}: {}".format(kind, policy, means))
            return

        result = TrialRunner(config).run()
        body = result.to_dict()
        correlation = score_error_correlation(result)
        body['score_hamming_spearman'] = None if math.isnan(correlation) else correlation
        self.write(manifest, body)
        for policy in config.policies:
            means = ', '.join('{:.4g}'.format(m) for m in result.mean_scores(policy))
            self.summary("{}: mean score by level {}".format(policy, means))


def get_command():
    return 'simulate', Command
