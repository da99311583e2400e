"""Loads and validates gramdet YAML config files."""
import logging
import os

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from gramdet._version import __config_version__
from gramdet.core.exceptions import ConfigFileError

SEED_ENVIRONMENT_VARIABLE = 'GRAMDET_SEED'
DEFAULT_CONFIG = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'gramdet.yaml')

# settings written as comma separated strings in YAML but used as lists
LIST_SETTINGS = {'gramdet.kernel_modules', 'gramdet.policy_modules',
                 'simulation.levels', 'simulation.policies'}

log = logging.getLogger('ConfigLoader')


def load_yaml_file(path):
    """Parse one YAML file into plain dicts and lists."""
    yaml = YAML(typ='safe')
    try:
        with open(path, encoding='utf-8') as f:
            data = yaml.load(f)
    except OSError as e:
        raise ConfigFileError("Cannot read {}: {}".format(path, e.strerror))
    except YAMLError as e:
        raise ConfigFileError("Cannot parse {}: {}".format(path, e))
    return data if data is not None else dict()


def _check_config_version(path):
    with open(path, encoding='utf-8') as f:
        first = f.readline().strip()
    if first.startswith('#config_version=') and first.split('=', 1)[1] != __config_version__:
        raise ConfigFileError("{} has config_version {}, this gramdet expects {}".format(
            path, first.split('=', 1)[1], __config_version__))


def string_to_list(value):
    """Turn 'a, b, c' into ['a', 'b', 'c']; lists pass through."""
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return [x.strip() for x in value.split(',') if x.strip()]
    return [value]


def _coerce(value, default, field):
    if field in LIST_SETTINGS:
        return string_to_list(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigFileError("Expected true/false, got {!r}".format(value), field)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigFileError("Expected an integer, got {!r}".format(value), field)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigFileError("Expected a number, got {!r}".format(value), field)
        return float(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigFileError("Expected a string, got {!r}".format(value), field)
    return value


def merge_config(base, overrides, prefix=''):
    """Deep-merge overrides into a copy of base, rejecting unknown keys."""
    merged = dict(base)
    for key, value in overrides.items():
        field = '{}.{}'.format(prefix, key) if prefix else str(key)
        if key not in base:
            raise ConfigFileError("Unknown setting", field)
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigFileError("Expected a section of settings", field)
            # registries like gramdet.commands accept new names
            if key == 'commands':
                merged[key] = dict(base[key], **value)
            else:
                merged[key] = merge_config(base[key], value, field)
        else:
            merged[key] = _coerce(value, base[key], field)
    return merged


def _normalize(config, prefix=''):
    for key, value in config.items():
        field = '{}.{}'.format(prefix, key) if prefix else key
        if isinstance(value, dict):
            _normalize(value, field)
        elif field in LIST_SETTINGS:
            config[key] = string_to_list(value)
    return config


def load_config(path=None):
    """Packaged defaults, with the user file at path merged over them."""
    config = _normalize(load_yaml_file(DEFAULT_CONFIG))
    if path:
        if os.path.isfile(path):
            _check_config_version(path)
        user = load_yaml_file(path)
        if not isinstance(user, dict):
            raise ConfigFileError("Top level of {} must be a mapping".format(path))
        try:
            config = merge_config(config, user)
        except ConfigFileError as e:
            e.extend("While loading {}".format(path))
            raise
        log.debug("Merged config file %s", path)
    return config


def default_seed(config=None):
    """Master seed from the environment, else the config, else 0."""
    env = os.environ.get(SEED_ENVIRONMENT_VARIABLE)
    if env is not None:
        try:
            return int(env, 0)
        except ValueError:
            raise ConfigFileError("{} must be an integer, got {!r}".format(
                SEED_ENVIRONMENT_VARIABLE, env))
    if config is not None:
        return int(config['gramdet']['seed'])
    return 0
