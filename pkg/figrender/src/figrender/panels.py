"""CSV-to-SVG panel rendering.

Strictly presentational: reads experiment CSVs (comment lines starting with
'#' are skipped), draws one line series per configured column - or one per
distinct value of a grouping column - with an optional shaded error band,
and writes deterministic SVG (fixed hash salt, text as paths, no embedded
date), so golden-file comparison is byte-exact.
"""

from __future__ import annotations

import csv
import html
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


class RenderError(Exception):
    """Aggregate of per-panel failures; message names each panel and cause."""


class MissingColumn(RenderError):
    def __init__(self, column: str, csv_path: str):
        self.column = column
        super().__init__(f"column {column!r} not present in {csv_path}")


class EmptyData(RenderError):
    def __init__(self, csv_path: str):
        super().__init__(f"no data rows in {csv_path}")


_RC = {
    "svg.hashsalt": "figrender",
    "svg.fonttype": "path",
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


@dataclass
class PanelSpec:
    """One chart: x column, y series with legend labels, optional error band.

    y_columns entries are either a column name or a [column, label] pair.
    With series_column set, rows are grouped by that column's value and the
    single y column is drawn once per group.
    """

    csv_path: str
    x_column: str
    y_columns: list = field(default_factory=list)
    error_column: str | None = None
    series_column: str | None = None
    title: str = ""
    output_path: str = "panel.svg"

    @classmethod
    def from_dict(cls, obj: dict) -> "PanelSpec":
        known = {"csv_path", "x_column", "y_columns", "error_column",
                 "series_column", "title", "output_path"}
        unknown = set(obj) - known
        if unknown:
            raise RenderError(f"unknown panel keys: {sorted(unknown)}")
        return cls(**obj)

    def series_defs(self) -> list[tuple[str, str]]:
        out = []
        for entry in self.y_columns:
            if isinstance(entry, str):
                out.append((entry, entry))
            else:
                column, label = entry
                out.append((column, label))
        return out


def _read_rows(csv_path: Path) -> tuple[list[str], list[dict]]:
    with open(csv_path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    rows = list(reader)
    if reader.fieldnames is None or not rows:
        raise EmptyData(str(csv_path))
    return list(reader.fieldnames), rows


def _column(rows: list[dict], name: str, csv_path: str) -> list:
    try:
        return [float(r[name]) for r in rows]
    except (KeyError, TypeError):
        raise MissingColumn(name, csv_path) from None
    except ValueError:
        return [r[name] for r in rows]


def render_panel(spec: PanelSpec, base_dir: Path | None = None) -> Path:
    """Draw one panel and return the written SVG path."""
    base = base_dir or Path(".")
    csv_path = base / spec.csv_path
    if not csv_path.exists():
        raise RenderError(f"csv file not found: {csv_path}")
    fieldnames, rows = _read_rows(csv_path)
    for needed in ([spec.x_column, spec.error_column, spec.series_column]
                   + [c for c, _ in spec.series_defs()]):
        if needed is not None and needed not in fieldnames:
            raise MissingColumn(needed, str(csv_path))
    out_path = base / spec.output_path
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if spec.series_column:
            groups: dict[str, list[dict]] = {}
            for r in rows:
                groups.setdefault(r[spec.series_column], []).append(r)
            for column, label in spec.series_defs():
                for value in sorted(groups):
                    name = value if label == column else f"{label} ({value})"
                    _draw_series(ax, spec, groups[value], column, name, str(csv_path))
        else:
            for column, label in spec.series_defs():
                _draw_series(ax, spec, rows, column, label, str(csv_path))
        ax.set_xlabel(spec.x_column)
        if spec.title:
            ax.set_title(spec.title)
        ax.legend()
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out_path


def _draw_series(ax, spec: PanelSpec, rows: list[dict], y_column: str,
                 label: str, csv_path: str):
    xs = _column(rows, spec.x_column, csv_path)
    ys = _column(rows, y_column, csv_path)
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    xs = [xs[i] for i in order]
    ys = [ys[i] for i in order]
    line, = ax.plot(xs, ys, marker="o", label=label)
    if spec.error_column:
        errs = _column(rows, spec.error_column, csv_path)
        errs = [errs[i] for i in order]
        ax.fill_between(xs, [y - e for y, e in zip(ys, errs)],
                        [y + e for y, e in zip(ys, errs)],
                        alpha=0.25, color=line.get_color(), linewidth=0)


def load_manifest(path: str | Path) -> list[PanelSpec]:
    """JSON array of panel objects (PanelSpec fields)."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise RenderError("manifest must be a JSON array of panel objects")
    return [PanelSpec.from_dict(obj) for obj in data]


def render_all(specs: list[PanelSpec], base_dir: Path | None = None,
               index_name: str = "index.html") -> Path:
    """Render every panel, write a static index of the outputs.

    All panels are attempted; failures are aggregated into one RenderError
    after the index (covering the successes) has been written.
    """
    base = base_dir or Path(".")
    rendered: list[tuple[PanelSpec, Path]] = []
    failures: list[str] = []
    for spec in specs:
        try:
            rendered.append((spec, render_panel(spec, base)))
        except RenderError as exc:
            failures.append(f"{spec.output_path}: {exc}")
    items = "\n".join(
        f'    <li><a href="{html.escape(str(p.relative_to(base)))}">'
        f"{html.escape(spec.title or spec.output_path)}</a>"
        f'<br><img src="{html.escape(str(p.relative_to(base)))}" width="480"></li>'
        for spec, p in rendered)
    index_path = base / index_name
    index_path.write_text(
        "<!DOCTYPE html>\n<html><head><title>panels</title></head><body>\n"
        f"  <ul>\n{items}\n  </ul>\n</body></html>\n")
    if failures:
        raise RenderError("; ".join(failures))
    return index_path
