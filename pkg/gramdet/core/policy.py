"""Corruption policy specs and the policy registry.

A policy decides the replacement label Z for a record whose report is
corrupted. Implementations live in gramdet/policies, one module per policy,
each exposing NAME and PolicyCls.
"""
import importlib
import logging
from dataclasses import dataclass, field, fields

from gramdet.core.exceptions import ConfigFileError, ParameterError

DEFAULT_POLICY_MODULES = ('uniform', 'asym_neighbor', 'row_sim_2nd', 'merge_01',
                          'group_updown', 'mixed')


@dataclass(frozen=True)
class MixedParams:

    """Dirichlet concentration parameters of the mixed policy."""

    alpha_off: float = 0.2
    alpha_diag: float = 6.0
    lambda_loc: float = 1.0
    lambda_up: float = 0.4
    gamma: float = 0.5
    lambda_def: float = 0.6
    default_label: int = 1

    def __post_init__(self):
        if self.alpha_off <= 0:
            raise ParameterError("alpha_off must be positive so every Dirichlet weight is positive")
        for name in ('alpha_diag', 'lambda_loc', 'lambda_up', 'lambda_def'):
            if getattr(self, name) < 0:
                raise ParameterError("{} must be >= 0".format(name))
        if self.default_label < 1:
            raise ParameterError("default_label is a 1-based label id")

    @classmethod
    def from_config(cls, section):
        known = {f.name for f in fields(cls)}
        for key in section:
            if key not in known:
                raise ConfigFileError("Unknown setting", 'mixed_policy.{}'.format(key))
        return cls(**section)


@dataclass(frozen=True)
class PolicySpec:

    """A corruption policy by name, with mixed-policy parameters."""

    kind: str
    mixed: MixedParams = field(default_factory=MixedParams)

    def __str__(self):
        return self.kind


class PolicyBase:

    """Parent class for corruption policies.

    replacement() returns the label Z for every record in truth (1-based
    values as an int array); corrupt() only uses it where a record is
    actually corrupted.
    """

    needs_experiment = False
    min_labels = 1

    def __init__(self, spec):
        self.spec = spec

    @property
    def name(self):
        return self.spec.kind

    def check(self, d, experiment):
        if d < self.min_labels:
            raise ParameterError("The {} policy needs at least {} labels".format(self.name, self.min_labels))
        if self.needs_experiment and experiment is None:
            raise ParameterError("The {} policy needs the experiment matrix".format(self.name))

    def replacement(self, truth, d, generator, experiment=None):
        raise NotImplementedError


class PolicyManager:

    """Registry of corruption policies by name."""

    def __init__(self, modules=DEFAULT_POLICY_MODULES):
        self.log = logging.getLogger('PolicyManager')
        self.modules = tuple(modules)
        self._policies = dict()
        for module in self.modules:
            path = module if '.' in module else 'gramdet.policies.{}'.format(module)
            i = importlib.import_module(path)
            self.register_policy(getattr(i, 'NAME'), getattr(i, 'PolicyCls'))

    @property
    def policies(self):
        return self._policies

    def register_policy(self, name, policy_cls):
        self._policies[name] = policy_cls

    def get_policy(self, spec):
        try:
            return self._policies[spec.kind](spec)
        except KeyError:
            raise ParameterError("Unknown corruption policy '{}'. Known policies: {}".format(
                spec.kind, ', '.join(sorted(self._policies))))


_default_manager = None


def default_manager():
    global _default_manager     # pylint: disable-msg=global-statement
    if _default_manager is None:
        _default_manager = PolicyManager()
    return _default_manager


def configure_policies(modules):
    """Replace the process-wide registry with one built from the given modules."""
    global _default_manager     # pylint: disable-msg=global-statement
    try:
        _default_manager = PolicyManager(modules)
    except ImportError as e:
        raise ConfigFileError("Cannot load policy module: {}".format(e), 'gramdet.policy_modules')
    return _default_manager


def get_policy(spec):
    return default_manager().get_policy(spec)
