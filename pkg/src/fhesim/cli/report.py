"""Deterministic CSV reports with a ``#`` metadata preamble."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import click

from .. import __version__
from ..archmodel import ArchConfig


def fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


class Report:
    """Rows are kept in insertion order; ratio columns are filled at emit time."""

    def __init__(self, command: str, archs: list[ArchConfig], seed: int, overrides=(), params=None):
        self.lines = [f"fhesim {__version__}", f"command: {command}", f"seed: {seed}"]
        for a in archs:
            self.lines.append(f"preset {a.name}: {a.digest()}")
        if overrides:
            self.lines.append("overrides: " + " ".join(overrides))
        if params:
            self.lines.append(f"params: {Path(params).name}")
        self.cols: list[str] = []
        self.rows: list[dict] = []
        self.ratios: tuple[list[str], str] | None = None

    def meta(self, line: str) -> None:
        self.lines.append(line)

    def columns(self, cols: list[str]) -> None:
        self.cols = list(cols)

    def ratio_columns(self, cols: list[str], baseline: str) -> None:
        """Add ``<col>_ratio`` = row value / the ``baseline`` arch's value for the same item."""
        self.ratios = (list(cols), baseline)
        self.lines.append(f"baseline: {baseline}")

    def row(self, **values) -> None:
        self.rows.append(values)

    def table(self) -> list[dict]:
        rows = [dict(r) for r in self.rows]
        if self.ratios:
            cols, baseline = self.ratios
            base = {r["item"]: r for r in rows if r["arch"] == baseline}
            for r in rows:
                for c in cols:
                    b = base[r["item"]][c]
                    r[f"{c}_ratio"] = r[c] / b if b else float("nan")
        return rows

    def header(self) -> list[str]:
        extra = [f"{c}_ratio" for c in self.ratios[0]] if self.ratios else []
        return self.cols + extra

    def render(self) -> str:
        buf = io.StringIO()
        for line in self.lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        cols = self.header()
        w.writerow(cols)
        for r in self.table():
            w.writerow([fmt(r[c]) for c in cols])
        return buf.getvalue()

    def emit(self, out: str | None) -> None:
        text = self.render()
        if out:
            Path(out).write_text(text)
        else:
            click.echo(text, nl=False)
