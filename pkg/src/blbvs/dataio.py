"""CSV ingestion with dummy coding, group sidecars, and CSV export.

A categorical column with k levels becomes k - 1 indicator columns (the
reference level is dropped) that form one group. Each continuous column is
its own group unless a sidecar file maps several source columns to one group.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import BINOMIAL, FAMILIES, GroupedDataset, GroupStructure, validate_dataset
from .exceptions import (
    BadResponse,
    EmptyFile,
    MissingColumn,
    MissingValue,
    NonNumericContinuous,
    UnknownLevel,
)

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"
MISSING = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class ColumnSpec:
    """How to read one source column.

    ``levels`` pins the allowed categories; any other value raises
    :class:`UnknownLevel`. The reference level defaults to the
    lexicographically first observed (or pinned) level.
    """

    name: str
    kind: str = CONTINUOUS
    reference_level: str | None = None
    levels: tuple | None = None

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, CATEGORICAL):
            raise ValueError(f"kind must be {CONTINUOUS!r} or {CATEGORICAL!r}")
        if self.kind == CONTINUOUS and (self.reference_level or self.levels):
            raise ValueError("only categorical columns take levels")


@dataclass(frozen=True)
class SourceCoding:
    name: str
    kind: str
    columns: tuple
    levels: tuple = ()
    reference: str | None = None

    def decode(self, block) -> str | float:
        """Recover the source value from this source's slice of one encoded row."""
        block = np.asarray(block, dtype=float)
        if self.kind == CONTINUOUS:
            return float(block[0])
        hot = np.flatnonzero(block == 1.0)
        if hot.size == 0:
            return self.reference
        return [lv for lv in self.levels if lv != self.reference][hot[0]]


@dataclass(frozen=True)
class Coding:
    """Column layout of an encoded dataset."""

    column_names: tuple
    sources: tuple = field(default_factory=tuple)
    response: str = "y"

    def decode_row(self, row) -> dict:
        row = np.asarray(row, dtype=float)
        return {s.name: s.decode(row[list(s.columns)]) for s in self.sources}


def read_table(path):
    """Header and rows of a comma-separated UTF-8 file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        rows = [r for r in reader if r]
    if not rows:
        raise EmptyFile(f"{path} has a header but no data rows")
    for k, r in enumerate(rows):
        if len(r) != len(header):
            raise MissingColumn(f"row {k + 2} has {len(r)} fields, header has {len(header)}")
    return header, rows


def _is_number(v: str) -> bool:
    try:
        float(v)
    except ValueError:
        return False
    return True


def infer_specs(header, rows, response):
    """Numeric columns are continuous, everything else categorical."""
    specs = []
    for k, name in enumerate(header):
        if name == response:
            continue
        numeric = all(_is_number(r[k]) for r in rows if r[k].strip().lower() not in MISSING)
        specs.append(ColumnSpec(name, CONTINUOUS if numeric else CATEGORICAL))
    return specs


def read_group_spec(path) -> dict:
    """Sidecar mapping ``column,group`` (header required) to a dict."""
    header, rows = read_table(path)
    try:
        ci, gi = header.index("column"), header.index("group")
    except ValueError:
        raise MissingColumn("group spec needs 'column' and 'group' headers") from None
    return {r[ci].strip(): r[gi].strip() for r in rows}


def encode(header, rows, response, specs=None, family=BINOMIAL, group_spec=None):
    """Build a dataset from parsed CSV content. Returns ``(dataset, coding)``."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    index = {h: k for k, h in enumerate(header)}
    if response not in index:
        raise MissingColumn(f"response column {response!r} not in header")
    specs = infer_specs(header, rows, response) if specs is None else list(specs)
    for s in specs:
        if s.name not in index:
            raise MissingColumn(f"column {s.name!r} not in header")

    def column(name):
        vals = [r[index[name]].strip() for r in rows]
        for k, v in enumerate(vals):
            if v.lower() in MISSING:
                raise MissingValue(f"missing value in column {name!r}, row {k + 2}")
        return vals

    y_raw = column(response)
    if not all(_is_number(v) for v in y_raw):
        raise BadResponse(f"response column {response!r} must be numeric")
    y = np.array([float(v) for v in y_raw])

    blocks, names, sources = [], [], []
    for s in specs:
        vals = column(s.name)
        start = len(names)
        if s.kind == CONTINUOUS:
            bad = [v for v in vals if not _is_number(v)]
            if bad:
                raise NonNumericContinuous(f"column {s.name!r} has value {bad[0]!r}")
            blocks.append(np.array([float(v) for v in vals])[:, None])
            names.append(s.name)
            sources.append(SourceCoding(s.name, CONTINUOUS, (start,)))
            continue
        observed = sorted(set(vals))
        if s.levels is not None:
            unknown = sorted(set(observed) - set(s.levels))
            if unknown:
                raise UnknownLevel(f"column {s.name!r} has unlisted level {unknown[0]!r}")
            levels = tuple(sorted(s.levels))
        else:
            levels = tuple(observed)
        if len(levels) < 2:
            raise UnknownLevel(f"column {s.name!r} needs at least two levels")
        ref = s.reference_level if s.reference_level is not None else levels[0]
        if ref not in levels:
            raise UnknownLevel(f"reference level {ref!r} not among levels of {s.name!r}")
        kept = [lv for lv in levels if lv != ref]
        arr = np.asarray(vals)
        blocks.append(np.column_stack([(arr == lv).astype(float) for lv in kept]))
        names.extend(f"{s.name}={lv}" for lv in kept)
        sources.append(SourceCoding(s.name, CATEGORICAL,
                                    tuple(range(start, start + len(kept))), levels, ref))

    x = np.hstack(blocks) if blocks else np.zeros((len(rows), 0))
    groups = _group_sources(sources, group_spec)
    d = GroupedDataset(x, y, groups, family)
    validate_dataset(d)
    return d, Coding(tuple(names), tuple(sources), response)


def _group_sources(sources, group_spec):
    if not group_spec:
        return GroupStructure([list(s.columns) for s in sources], [s.name for s in sources])
    missing = [s.name for s in sources if s.name not in group_spec]
    if missing:
        raise MissingColumn(f"group spec has no entry for {missing[0]!r}")
    order, members = [], {}
    for s in sources:
        g = group_spec[s.name]
        if g not in members:
            order.append(g)
            members[g] = []
        members[g].extend(s.columns)
    return GroupStructure([members[g] for g in order], order)


def ingest_csv(path, response, specs=None, family=BINOMIAL, group_spec=None,
               return_coding=False):
    """Read a CSV file into a :class:`GroupedDataset`.

    ``group_spec`` is a dict or a path to a ``column,group`` sidecar file.
    Row order is preserved. Missing values are rejected.
    """
    header, rows = read_table(path)
    if isinstance(group_spec, (str, bytes)) or hasattr(group_spec, "__fspath__"):
        group_spec = read_group_spec(group_spec)
    d, coding = encode(header, rows, response, specs, family, group_spec)
    return (d, coding) if return_coding else d


def write_dataset_csv(d: GroupedDataset, path, response="y", sidecar=None) -> list:
    """Write ``d`` as CSV (columns ``x1..xp`` then the response).

    With ``sidecar`` given, also write the ``column,group`` file that
    restores the grouping on ingestion. Returns the column names.
    """
    names = [f"x{j + 1}" for j in range(d.p)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names + [response])
        for xi, yi in zip(d.x, d.y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
    if sidecar is not None:
        label = {}
        for name, cols in zip(d.groups.names, d.groups.groups):
            for c in cols:
                label[int(c)] = name
        with open(sidecar, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["column", "group"])
            for j, nm in enumerate(names):
                w.writerow([nm, label[j]])
    return names
