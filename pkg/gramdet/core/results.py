"""Results files: a JSON document with the run manifest under 'manifest'."""
import json
import logging
import sys
import time
from enum import Enum

import numpy as np

from gramdet._version import __results_version__, __version__
from gramdet.core.ingest import file_digest

log = logging.getLogger('Results')


class RunManifest:

    """What produced a results file: command, flags, seed, version and input digests."""

    def __init__(self, command, flags=None, seed=None):
        self.command = command
        self.flags = dict(flags or {})
        self.seed = seed
        self.inputs = dict()
        self._start = time.time()
        self.elapsed = None

    def add_input(self, path, digest=None):
        self.inputs[str(path)] = digest if digest is not None else file_digest(path)

    def finish(self):
        self.elapsed = time.time() - self._start
        return self

    def to_dict(self):
        return {'command': self.command,
                'flags': self.flags,
                'seed': self.seed,
                'version': __version__,
                'results_version': __results_version__,
                'python': sys.version.split()[0],
                'inputs': self.inputs,
                'started': self._start,
                'elapsed_seconds': self.elapsed}


def _to_json(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Enum):
        return value.value
    if hasattr(value, 'to_dict'):
        return value.to_dict()
    raise TypeError("{} is not JSON serializable".format(type(value).__name__))


def results_document(manifest, body):
    document = {'manifest': manifest.to_dict()}
    document.update(body)
    return document


def dumps(document, indent=2):
    return json.dumps(document, default=_to_json, sort_keys=True, indent=indent)


def write_results(path, manifest, body, indent=2):
    """Write body plus manifest as JSON to path, or to stdout when path is None or '-'."""
    text = dumps(results_document(manifest.finish(), body), indent)
    if path in (None, '-'):
        sys.stdout.write(text + '\n')
        return
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text + '\n')
    log.info("Wrote results to %s", path)
