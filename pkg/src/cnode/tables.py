"""Aligned sweep tables and their CSV/JSON serialization.

CSV dialect: comma separated, header row, LF line endings, floats with 17
significant digits (always carrying a decimal point or exponent so they
re-read as floats), booleans as ``true``/``false`` and missing cells empty.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import InvalidInputError

__all__ = ["SweepTable", "format_cell", "parse_cell"]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, ".17g")
    if not any(c in s for c in ".e"):
        s += ".0"
    return s


def parse_cell(text: str):
    text = text.strip()
    if text == "":
        return None
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("nan", "inf", "-inf", "+inf") or any(c in low for c in ".e"):
        return float(text)
    try:
        return int(text)
    except ValueError:
        return text


def _jsonable(value):
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if math.isfinite(x) else None
    return value


@dataclass
class SweepTable:
    """Rows keyed by column name, ordered along ``axis_name``."""

    axis_name: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis_name not in self.columns:
            self.columns = [self.axis_name] + list(self.columns)

    def __len__(self):
        return len(self.rows)

    def append(self, **row):
        unknown = set(row) - set(self.columns)
        if unknown:
            raise InvalidInputError(f"unknown columns {sorted(unknown)}")
        self.rows.append({c: row.get(c) for c in self.columns})

    def column(self, name) -> np.ndarray:
        vals = [r.get(name) for r in self.rows]
        return np.array([np.nan if v is None else v for v in vals])

    def validate(self):
        """Axis strictly increasing and every populated numeric cell finite."""
        axis = self.column(self.axis_name).astype(float)
        if np.any(np.diff(axis) <= 0):
            raise InvalidInputError(f"axis {self.axis_name!r} is not strictly increasing")
        for r in self.rows:
            for c, v in r.items():
                if isinstance(v, float) and not math.isfinite(v):
                    raise InvalidInputError(f"non-finite value in column {c!r}")

    # -- CSV -------------------------------------------------------------
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_cell(r.get(c)) for c in self.columns])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, newline="")
        return text

    @classmethod
    def from_csv(cls, path, axis_name: str | None = None) -> "SweepTable":
        return cls.parse_csv(Path(path).read_text(), axis_name)

    @classmethod
    def parse_csv(cls, text: str, axis_name: str | None = None) -> "SweepTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        table = cls(axis_name or header[0], header)
        for row in reader:
            if row:
                table.rows.append({c: parse_cell(v) for c, v in zip(header, row)})
        return table

    # -- JSON ------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "axis_name": self.axis_name,
            "columns": list(self.columns),
            "rows": [{c: _jsonable(r.get(c)) for c in self.columns} for r in self.rows],
            "meta": self.meta,
        }

    def to_json(self, path=None, indent: int | None = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent, allow_nan=False) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, d: dict) -> "SweepTable":
        return cls(d["axis_name"], list(d["columns"]), [dict(r) for r in d["rows"]],
                   dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, path) -> "SweepTable":
        return cls.parse_json(Path(path).read_text())

    @classmethod
    def parse_json(cls, text: str) -> "SweepTable":
        return cls.from_dict(json.loads(text))
