"""Figure specifications: small JSON recipes mapping result CSVs to plots.

A spec names its input CSVs, the plot kind, axes, and one entry per series.
Series select rows with an optional ``where`` filter (long-format CSVs) and
draw one column against the x column (or histogram bins).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path


class SchemaError(ValueError):
    """Spec/CSV mismatch: missing column, empty file, bad axis data."""


KINDS = ("lines", "grouped_bars", "histogram_lines")
FIGURE_IDS = tuple(f"fig{i}" for i in range(2, 10))


@dataclass(frozen=True)
class Axis:
    column: str | None = None
    label: str = ""
    scale: str = "linear"

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise SchemaError(f"unknown axis scale {self.scale!r}")


@dataclass(frozen=True)
class Series:
    column: str
    label: str
    csv_index: int = 0
    where: dict = field(default_factory=dict)
    style: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    kind: str
    inputs: tuple[str, ...]
    title: str
    x: Axis
    y: Axis
    series: tuple[Series, ...]
    reference_column: str | None = None
    reference_label: str = ""

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise SchemaError(f"figure_id must be one of {FIGURE_IDS}, got {self.figure_id!r}")
        if self.kind not in KINDS:
            raise SchemaError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.series:
            raise SchemaError("spec must define at least one series")
        for s in self.series:
            if not 0 <= s.csv_index < len(self.inputs):
                raise SchemaError(f"series {s.label!r} references csv {s.csv_index}, "
                                  f"but only {len(self.inputs)} inputs are given")


def load_spec(path) -> FigureSpec:
    with open(path) as fh:
        raw = json.load(fh)
    try:
        return FigureSpec(
            figure_id=raw["figure_id"],
            kind=raw["kind"],
            inputs=tuple(raw["inputs"]),
            title=raw.get("title", ""),
            x=Axis(**raw.get("x", {})),
            y=Axis(**raw.get("y", {})),
            series=tuple(Series(**s) for s in raw["series"]),
            reference_column=raw.get("reference_column"),
            reference_label=raw.get("reference_label", ""),
        )
    except KeyError as exc:
        raise SchemaError(f"figure spec missing field {exc}") from exc
    except TypeError as exc:
        raise SchemaError(f"malformed figure spec: {exc}") from exc


def load_table(path) -> dict[str, list[str]]:
    """CSV as a column dict; raises SchemaError on empty files."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input CSV not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [row for row in reader if row]
    if header is None or not rows:
        raise SchemaError(f"input CSV is empty: {path}")
    return {name: [row[i] for row in rows] for i, name in enumerate(header)}


def column(table: dict[str, list[str]], name: str, path) -> list[str]:
    if name not in table:
        raise SchemaError(f"column {name!r} not present in {path} "
                          f"(have: {', '.join(table)})")
    return table[name]


def select(table: dict[str, list[str]], where: dict, path) -> dict[str, list[str]]:
    """Rows matching all equality filters (values compared as strings)."""
    if not where:
        return table
    n = len(next(iter(table.values())))
    mask = [True] * n
    for key, wanted in where.items():
        col = column(table, key, path)
        mask = [m and col[i] == str(wanted) for i, m in enumerate(mask)]
    out = {name: [vals[i] for i in range(n) if mask[i]] for name, vals in table.items()}
    if not next(iter(out.values())):
        raise SchemaError(f"filter {where!r} matches no rows of {path}")
    return out
