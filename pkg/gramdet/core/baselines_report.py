"""Side-by-side comparison of the Gram determinant score and baseline scores.

Every score kind is computed on the same corrupted reports, using the trial
stream run_trials uses, so comparisons across kinds are paired.
"""
import logging
from dataclasses import dataclass, asdict
from itertools import combinations

from gramdet.core.exceptions import ParameterError
from gramdet.core.scoring import BaselineSpec
from gramdet.core.simulate import TrialRunner, summarize

GRAM_KIND = 'gram'

log = logging.getLogger('BaselinesReport')


@dataclass(frozen=True)
class ComparisonCell:
    kind: str
    policy: str
    p: float
    count: int
    mean: float
    std_error: float


class ComparisonResult:

    """Per (kind, policy, level) summaries and rank-consistency flags between kinds."""

    def __init__(self, config, kinds, records):
        self.config = config
        self.kinds = [GRAM_KIND] + [str(k) for k in kinds]
        self.cells = []
        for kind in self.kinds:
            for policy in config.policies:
                for p in config.levels:
                    values = [self._value(r, kind) for r in records
                              if r.policy == str(policy) and r.p == p]
                    summary = summarize(values)
                    self.cells.append(ComparisonCell(kind, str(policy), p, len(values),
                                                     summary['mean'], summary['std_error']))
        self.rank_consistency = self._rank_consistency()

    @staticmethod
    def _value(record, kind):
        return record.score if kind == GRAM_KIND else record.baselines[kind]

    def means(self, kind, policy):
        """Mean per level for one kind and policy, in level order."""
        lookup = {(c.kind, c.policy, c.p): c.mean for c in self.cells}
        return [lookup[(kind, str(policy), p)] for p in self.config.levels]

    def _rank_consistency(self):
        flags = dict()
        for policy in self.config.policies:
            orders = dict()
            for kind in self.kinds:
                means = self.means(kind, policy)
                orders[kind] = sorted(range(len(means)), key=lambda i, m=means: -m[i])
            for a, b in combinations(self.kinds, 2):
                flags['{}|{}|{}'.format(policy, a, b)] = orders[a] == orders[b]
        return flags

    def to_dict(self):
        return {'config': self.config.to_dict(),
                'kinds': self.kinds,
                'cells': [asdict(c) for c in self.cells],
                'rank_consistency': self.rank_consistency}


def compare_scores(config, kinds, workers=None):
    """Run the shared trial stream and summarize every requested score kind."""
    kinds = [k if isinstance(k, BaselineSpec) else BaselineSpec.parse(k) for k in kinds]
    if not kinds:
        raise ParameterError("Name at least one baseline score to compare")
    log.info("Comparing %s against the Gram determinant score", ', '.join(str(k) for k in kinds))
    runner = TrialRunner(config, baselines=kinds, workers=workers)
    result = runner.run()
    return ComparisonResult(config, kinds, result.records)
