"""Series ingestion from CSV and report serialisation (JSON, CSV tables)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError

SCHEMA_VERSION = 1


class SeriesFormatError(DomainError):
    """A series file parses but its contents are unusable."""


@dataclass(frozen=True)
class SeriesFile:
    values: np.ndarray
    labels: tuple | None
    source: str
    column: str | int


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_series_csv(path, column=None):
    """Read one numeric column of a comma-separated file.

    A single header row is detected when the first row does not parse as
    numbers. ``column`` is a header name or a 0-based index; by default the
    last column is used, so ``year,flow`` files yield the flow. With two or
    more columns the first one is kept as labels.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise SeriesFormatError(f"{path}: file is empty")
    first = [c.strip() for c in rows[0]]
    header = None
    if not all(_is_number(c) for c in first):
        header, rows = first, rows[1:]
        start_line = 2
    else:
        start_line = 1
    width = len(header) if header else len(first)
    if column is None:
        idx = width - 1
    elif isinstance(column, int) or str(column).lstrip("-").isdigit():
        idx = int(column)
        if not -width <= idx < width:
            raise SeriesFormatError(f"{path}: column index {idx} out of range (file has {width} columns)")
        idx %= width
    else:
        if header is None or column not in header:
            raise SeriesFormatError(f"{path}: no column named {column!r}")
        idx = header.index(column)
    values, labels = [], []
    for lineno, row in enumerate(rows, start=start_line):
        if idx >= len(row):
            raise SeriesFormatError(f"{path}: row {lineno} has no column {idx}")
        cell = row[idx].strip()
        try:
            v = float(cell)
        except ValueError:
            raise SeriesFormatError(f"{path}: row {lineno}, column {idx}: cannot parse {cell!r}") from None
        if not math.isfinite(v):
            raise SeriesFormatError(f"{path}: row {lineno}, column {idx}: non-finite value {cell!r}")
        values.append(v)
        if width > 1 and idx != 0:
            labels.append(row[0].strip())
    if len(values) < 2:
        raise SeriesFormatError(f"{path}: need at least 2 values, got {len(values)}")
    name = header[idx] if header else idx
    return SeriesFile(np.array(values), tuple(labels) if labels else None, str(path), name)


def write_series_csv(path, values, header="value"):
    """Write a single-column series with a header; floats keep full precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([header])
        for v in np.asarray(values, dtype=float):
            w.writerow([repr(float(v))])


# --------------------------------------------------------------------------
# reports


@dataclass
class Report:
    command: str
    inputs: dict
    results: dict
    timing: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "inputs": _plain(self.inputs),
            "results": _plain(self.results),
            "timing": _plain(self.timing),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["command"], d["inputs"], d["results"], d.get("timing", {}), d["schema_version"])


def _plain(obj):
    """Convert NumPy containers and scalars to JSON-native types; NaN becomes None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def report_to_json(report):
    # float repr is the shortest string that round-trips exactly
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def read_report_json(path):
    return Report.from_dict(json.loads(Path(path).read_text()))


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def _split_tables(obj, prefix=""):
    """Yield ``(name, table)`` for every ``tables`` mapping and flatten the rest."""
    scalars, tables = [], []
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if k == "tables" and isinstance(v, dict):
            for tname, tab in v.items():
                tables.append((f"{prefix}{tname}".replace(".", "_"), tab))
        elif isinstance(v, dict):
            s, t = _split_tables(v, key + ".")
            scalars += s
            tables += t
        elif isinstance(v, list):
            scalars.append((key, ";".join(_fmt(x) for x in v)))
        else:
            scalars.append((key, _fmt(v)))
    return scalars, tables


def write_report(report, fmt, path):
    """Write ``report`` as JSON, or as CSV files ``<stem>.csv`` + ``<stem>_<table>.csv``.

    Returns the list of paths written.
    """
    path = Path(path)
    fmt = fmt.lower()
    try:
        if fmt == "json":
            path.write_text(report_to_json(report))
            return [path]
        if fmt != "csv":
            raise DomainError(f"unknown report format {fmt!r}")
        d = report.to_dict()
        scalars, tables = _split_tables({k: d[k] for k in ("schema_version", "command", "inputs")})
        s, tables = _split_tables(d["results"])
        scalars += [(f"results.{k}", v) for k, v in s]
        written = [path]
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["key", "value"])
            w.writerows(scalars)
        for name, tab in tables:
            cols = list(tab)
            tpath = path.with_name(f"{path.stem}_{name}{path.suffix or '.csv'}")
            with tpath.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(cols)
                for row in zip(*(tab[c] for c in cols)):
                    w.writerow([_fmt(v) for v in row])
            written.append(tpath)
        return written
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", str(path)) from exc
