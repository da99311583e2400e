"""Reading and writing dataset files, and turning numeric series into labels.

A dataset file is delimited text (comma or tab, detected from the header)
with one header line. One or more report columns and an optional truth
column hold label strings; the remaining columns are the observation: a
single categorical column, or several numeric columns forming an embedding.
"""
import csv
import hashlib
import io
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from gramdet.core.dataset import Labels
from gramdet.core.exceptions import InputFileError, ParameterError, ShapeError
from gramdet.core.kernels import ObservationSet

VARIANTS = ('auto', 'categorical', 'embedding')

log = logging.getLogger('Ingest')


@dataclass(frozen=True)
class DatasetSchema:

    """Which columns of a dataset file hold what."""

    report_columns: Tuple[str, ...] = ('report', )
    truth_column: Optional[str] = 'truth'
    observation_columns: Optional[Tuple[str, ...]] = None
    variant: str = 'auto'
    require_truth: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ParameterError("Observation variant must be one of {}".format(', '.join(VARIANTS)))
        if not self.report_columns:
            raise ParameterError("Name at least one report column")

    @classmethod
    def from_config(cls, config, **overrides):
        section = config['ingest']
        values = dict(report_columns=(section['report_column'], ),
                      truth_column=section['truth_column'] or None,
                      variant=section['variant'])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class BucketizerSpec:

    """Number of quantile buckets; intervals are closed on the left."""

    buckets: int = 4

    def __post_init__(self):
        if self.buckets < 2:
            raise ParameterError("Need at least 2 buckets, got {}".format(self.buckets))


class LabelMap:

    """Assigns ids 1, 2, ... to label strings in order of first appearance."""

    def __init__(self, names=()):
        self._ids = OrderedDict()
        for name in names:
            self.add(name)

    def add(self, name):
        if name not in self._ids:
            self._ids[name] = len(self._ids) + 1
        return self._ids[name]

    def ids(self, names):
        return np.array([self.add(n) for n in names], dtype=np.int64)

    @property
    def names(self):
        return tuple(self._ids)

    def __len__(self):
        return len(self._ids)


@dataclass
class Dataset:

    """Reports, optional truth and observations loaded from one file."""

    reports: OrderedDict
    observations: Optional[ObservationSet] = None
    truth: Optional[Labels] = None
    label_names: Tuple[str, ...] = ()
    observation_columns: Tuple[str, ...] = ()
    truth_column: Optional[str] = None
    path: Optional[str] = None
    digest: Optional[str] = None
    metadata: dict = field(default_factory=dict)

    @property
    def report(self):
        """The first report column."""
        return next(iter(self.reports.values()))

    @property
    def d(self):
        return self.report.d

    def with_alphabet(self, d, label_names=None):
        """Widen every label set to d labels, e.g. after sharing a LabelMap across files."""
        self.reports = OrderedDict((k, v.with_alphabet(d)) for k, v in self.reports.items())
        if self.truth is not None:
            self.truth = self.truth.with_alphabet(d)
        if label_names is not None:
            self.label_names = tuple(label_names)
        return self


def file_digest(path):
    """sha256 hex digest of a file's bytes."""
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(65536), b''):
            sha.update(chunk)
    return sha.hexdigest()


def _read_rows(path, require_records=True):
    try:
        with open(path, encoding='utf-8', newline='') as f:
            text = f.read()
    except OSError as e:
        raise InputFileError("cannot read file: {}".format(e.strerror), path)
    except UnicodeDecodeError:
        raise InputFileError("file is not UTF-8 text", path)

    if not text.strip():
        raise InputFileError("file is empty", path)
    header_line = text.splitlines()[0]
    delimiter = '\t' if '\t' in header_line else ','
    rows = []
    for line, row in enumerate(csv.reader(io.StringIO(text), delimiter=delimiter), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        rows.append((line, [cell.strip() for cell in row]))
    header = rows[0][1]
    if len(set(header)) != len(header):
        raise InputFileError("duplicate column names in header", path, rows[0][0])
    records = rows[1:]
    if not records and require_records:
        raise InputFileError("file has a header but no records", path)
    for line, row in records:
        if len(row) != len(header):
            raise InputFileError("expected {} fields, found {}".format(len(header), len(row)), path, line)
    return header, records


def _parse_float(value, path, line):
    try:
        return float(value)
    except ValueError:
        raise InputFileError("'{}' is not a number".format(value), path, line)


def _parse_observations(records, index, variant, path):
    if variant == 'auto':
        variant = 'categorical' if len(index) == 1 else 'embedding'
    if variant == 'categorical':
        if len(index) != 1:
            raise InputFileError("categorical observations need exactly one column", path, 1)
        categories = LabelMap()
        ids = categories.ids(row[index[0]] for _, row in records)
        return ObservationSet.categorical(ids, len(categories), categories.names)
    vectors = [[_parse_float(row[i], path, line) for i in index] for line, row in records]
    return ObservationSet.embedding(np.array(vectors, dtype=float))


def load_observations(path, variant='auto', columns=None):
    """An observation-only file: every column (or the named ones) is observation data."""
    if variant not in VARIANTS:
        raise ParameterError("Observation variant must be one of {}".format(', '.join(VARIANTS)))
    header, records = _read_rows(path)
    names = list(columns) if columns else header
    for name in names:
        if name not in header:
            raise InputFileError("missing observation column '{}'".format(name), path, 1)
    return _parse_observations(records, [header.index(name) for name in names], variant, path)


def load_dataset(path, schema=DatasetSchema(), label_map=None):
    """Load a dataset file.

    Label strings of the report and truth columns share one id space,
    assigned by first appearance reading row by row (report columns, then
    truth). Pass a LabelMap to share ids across several files.
    """
    header, records = _read_rows(path)
    columns = {name: i for i, name in enumerate(header)}

    for name in schema.report_columns:
        if name not in columns:
            raise InputFileError("missing report column '{}'".format(name), path, 1)
    truth_column = schema.truth_column if schema.truth_column in columns else None
    if schema.require_truth and truth_column is None:
        raise InputFileError("missing truth column '{}'".format(schema.truth_column), path, 1)

    if schema.observation_columns is not None:
        obs_columns = tuple(schema.observation_columns)
        for name in obs_columns:
            if name not in columns:
                raise InputFileError("missing observation column '{}'".format(name), path, 1)
    else:
        used = set(schema.report_columns) | {truth_column}
        obs_columns = tuple(name for name in header if name not in used)

    label_map = label_map if label_map is not None else LabelMap()
    label_columns = list(schema.report_columns) + ([truth_column] if truth_column else [])
    label_ids = {name: [] for name in label_columns}
    for _, row in records:
        for name in label_columns:
            label_ids[name].append(label_map.add(row[columns[name]]))

    d = len(label_map)
    reports = OrderedDict((name, Labels(label_ids[name], d)) for name in schema.report_columns)
    truth = Labels(label_ids[truth_column], d) if truth_column else None

    observations = None
    if obs_columns:
        observations = _parse_observations(records, [columns[name] for name in obs_columns],
                                           schema.variant, path)

    log.debug("Loaded %s: N=%s d=%s observations=%s", path, len(records), d, observations)
    mapping = {name: i for i, name in enumerate(label_map.names, start=1)}
    return Dataset(reports, observations, truth, label_map.names, obs_columns, truth_column,
                   path, file_digest(path), {'label_mapping': mapping})


def save_dataset(path, dataset, delimiter=','):
    """Write a dataset in the format load_dataset reads, to a path or an open text file."""
    names = dataset.label_names or tuple(str(i) for i in range(1, dataset.d + 1))
    header = list(dataset.reports)
    columns = [[names[i - 1] for i in labels.values] for labels in dataset.reports.values()]
    if dataset.truth is not None:
        header.append(dataset.truth_column or 'truth')
        columns.append([names[i - 1] for i in dataset.truth.values])

    obs = dataset.observations
    if obs is not None:
        if obs.is_categorical:
            categories = obs.categories or tuple(str(i) for i in range(1, obs.k + 1))
            header.append(dataset.observation_columns[0] if dataset.observation_columns else 'observation')
            columns.append([categories[i - 1] for i in obs.values])
        else:
            width = obs.k
            obs_names = dataset.observation_columns or tuple('y{}'.format(i) for i in range(1, width + 1))
            header.extend(obs_names)
            columns.extend([[repr(float(v)) for v in obs.values[:, i]] for i in range(width)])

    lengths = {len(c) for c in columns}
    if len(lengths) != 1:
        raise ShapeError("Dataset columns differ in length")
    if hasattr(path, 'write'):
        _write_rows(path, header, columns, delimiter)
        return
    with open(path, 'w', encoding='utf-8', newline='') as f:
        _write_rows(f, header, columns, delimiter)


def _write_rows(f, header, columns, delimiter):
    writer = csv.writer(f, delimiter=delimiter, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(zip(*columns))


def read_series(path):
    """A single numeric column, with or without a header line."""
    header, records = _read_rows(path, require_records=False)
    if len(header) != 1:
        raise InputFileError("expected a single column, found {}".format(len(header)), path, 1)
    values = []
    try:
        values.append(float(header[0]))
    except ValueError:
        pass
    values.extend(_parse_float(row[0], path, line) for line, row in records)
    if not values:
        raise InputFileError("series has no values", path)
    return np.array(values)


def diff_series(series):
    """Successive differences, one shorter than the input."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1 or series.size < 2:
        raise ParameterError("Differencing needs a series of at least 2 values")
    return np.diff(series)


def quantile_boundaries(series, buckets):
    """Linear-interpolation empirical quantiles at i/B for i = 1..B-1.

    Positions (N - 1) i / B are split into whole and fractional parts with
    integer arithmetic so boundaries that land on a data point equal it
    exactly.
    """
    ordered = np.sort(np.asarray(series, dtype=float))
    n = ordered.size
    out = np.empty(buckets - 1)
    for i in range(1, buckets):
        whole, rest = divmod((n - 1) * i, buckets)
        out[i - 1] = ordered[whole]
        if rest:
            out[i - 1] += rest / buckets * (ordered[whole + 1] - ordered[whole])
    return out


def quantile_bucketize(series, spec=BucketizerSpec()):
    """Label each value by its quantile bucket, 1..B.

    Bucket i is [q_(i-1)/B, q_i/B); the maximum lands in bucket B.
    Boundaries equal to the minimum are ignored, so a constant series maps
    entirely to bucket 1.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1 or series.size < spec.buckets:
        raise ParameterError("Bucketizing into {} buckets needs at least {} values".format(
            spec.buckets, spec.buckets))
    if not np.all(np.isfinite(series)):
        raise ParameterError("Series values must be finite")
    boundaries = quantile_boundaries(series, spec.buckets)
    boundaries = boundaries[boundaries > series.min()]
    return Labels(np.searchsorted(boundaries, series, side='right') + 1, spec.buckets)
