"""Headless, deterministic rendering of figure specs to image files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .spec import FigureSpec, SchemaError, column, load_table, select

FIGSIZE = (7.0, 4.6)
DPI = 130

_FALLBACK_MARKERS = ("o", "s", "^", "v", "d", "x", "+", "*", "<", ">", "p", "h")


@dataclass(frozen=True)
class RenderResult:
    path: Path
    n_series: int


def _floats(values: list[str], name: str, path) -> np.ndarray:
    try:
        return np.array([float(v) for v in values])
    except ValueError as exc:
        raise SchemaError(f"column {name!r} of {path} is not numeric: {exc}") from exc


def _check_log(axis_scale: str, data: np.ndarray, what: str) -> None:
    if axis_scale == "log" and np.any(data <= 0):
        raise SchemaError(f"log scale requested but {what} has non-positive values")


def _series_style(series, i: int) -> dict:
    style = dict(series.style)
    style.setdefault("marker", _FALLBACK_MARKERS[i % len(_FALLBACK_MARKERS)])
    return style


def render(spec: FigureSpec, out_path, csv_dir=".") -> RenderResult:
    """Render one figure; returns the output path and drawn series count."""
    csv_dir = Path(csv_dir)
    paths = [csv_dir / p for p in spec.inputs]
    tables = [load_table(p) for p in paths]

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        if spec.kind == "lines":
            n = _render_lines(ax, spec, tables, paths)
        elif spec.kind == "histogram_lines":
            n = _render_histograms(ax, spec, tables, paths)
        elif spec.kind == "grouped_bars":
            n = _render_grouped_bars(ax, spec, tables, paths)
        else:
            raise SchemaError(f"unknown kind {spec.kind!r}")

        ax.set_xlabel(spec.x.label)
        ax.set_ylabel(spec.y.label)
        if spec.title:
            ax.set_title(spec.title)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        out_path = Path(out_path)
        fig.savefig(out_path)
    finally:
        plt.close(fig)
    return RenderResult(path=out_path, n_series=n)


def _render_lines(ax, spec, tables, paths):
    if spec.x.column is None:
        raise SchemaError("line plots need an x column")
    for i, s in enumerate(spec.series):
        table, path = tables[s.csv_index], paths[s.csv_index]
        rows = select(table, s.where, path)
        x = _floats(column(rows, spec.x.column, path), spec.x.column, path)
        y = _floats(column(rows, s.column, path), s.column, path)
        order = np.argsort(x)
        _check_log(spec.x.scale, x, f"x column {spec.x.column!r}")
        _check_log(spec.y.scale, y, f"series {s.label!r}")
        ax.plot(x[order], y[order], label=s.label, **_series_style(s, i))
    ax.set_xscale(spec.x.scale)
    ax.set_yscale(spec.y.scale)
    return len(spec.series)


def _render_histograms(ax, spec, tables, paths):
    for i, s in enumerate(spec.series):
        table, path = tables[s.csv_index], paths[s.csv_index]
        rows = select(table, s.where, path)
        left = _floats(column(rows, "bin_left", path), "bin_left", path)
        right = _floats(column(rows, "bin_right", path), "bin_right", path)
        y = _floats(column(rows, s.column, path), s.column, path)
        mid = 0.5 * (left + right)
        order = np.argsort(mid)
        style = dict(s.style)
        ax.step(mid[order], y[order], where="mid", label=s.label, **style)
    ax.set_xscale(spec.x.scale)
    ax.set_yscale(spec.y.scale)
    return len(spec.series)


def _render_grouped_bars(ax, spec, tables, paths):
    if spec.x.column is None:
        raise SchemaError("grouped bars need an x (category) column")
    # categories fixed by first appearance in the first series' rows
    first = select(tables[spec.series[0].csv_index], spec.series[0].where,
                   paths[spec.series[0].csv_index])
    seen = []
    for v in column(first, spec.x.column, paths[spec.series[0].csv_index]):
        if v not in seen:
            seen.append(v)
    width = 0.8 / len(spec.series)
    base = np.arange(len(seen), dtype=float)
    for i, s in enumerate(spec.series):
        table, path = tables[s.csv_index], paths[s.csv_index]
        rows = select(table, s.where, path)
        cats = column(rows, spec.x.column, path)
        vals = _floats(column(rows, s.column, path), s.column, path)
        lookup = dict(zip(cats, vals))
        missing = [c for c in seen if c not in lookup]
        if missing:
            raise SchemaError(f"series {s.label!r} lacks categories {missing}")
        y = np.array([lookup[c] for c in seen])
        _check_log(spec.y.scale, y, f"series {s.label!r}")
        ax.bar(base + (i - (len(spec.series) - 1) / 2) * width, y, width,
               label=s.label, **s.style)
    if spec.reference_column is not None:
        path0 = paths[spec.series[0].csv_index]
        refs = _floats(column(first, spec.reference_column, path0),
                       spec.reference_column, path0)
        lookup = dict(zip(column(first, spec.x.column, path0), refs))
        for k, cat in enumerate(seen):
            ax.hlines(lookup[cat], base[k] - 0.45, base[k] + 0.45,
                      colors="black", linestyles="--",
                      label=spec.reference_label if k == 0 else None)
    ax.set_xticks(base)
    ax.set_xticklabels(seen, fontsize=8)
    ax.set_yscale(spec.y.scale)
    return len(spec.series)
