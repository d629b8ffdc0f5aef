"""Experiment reports: a (scaler, model, metric) grid of MetricCells."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import ArgumentError
from .metrics import MetricCell


@dataclass
class ExperimentReport:
    experiment: str
    scalers: tuple[str, ...]
    models: tuple[str, ...]
    metrics: tuple[str, ...]
    cells: dict = field(default_factory=dict)     # (scaler, model, metric) -> MetricCell
    skips: dict = field(default_factory=dict)     # (scaler, model) -> reason
    notes: list = field(default_factory=list)
    per_rep: dict = field(default_factory=dict)   # (scaler, model, metric) -> {rep: value}

    def cell(self, scaler: str, model: str, metric: str) -> MetricCell | None:
        return self.cells.get((scaler, model, metric))

    def is_complete(self) -> bool:
        for s in self.scalers:
            for m in self.models:
                skipped = (s, m) in self.skips
                for k in self.metrics:
                    if skipped == ((s, m, k) in self.cells):
                        return False
        return True


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def _tables(r: ExperimentReport):
    """Yield (title, header, rows) blocks in a fixed order."""
    for metric in r.metrics:
        for stat in ("mean", "sd"):
            rows = []
            for s in r.scalers:
                row = [s]
                for m in r.models:
                    c = r.cells.get((s, m, metric))
                    row.append("/" if c is None else _fmt(getattr(c, stat)))
                rows.append(row)
            yield metric, stat, ["scaler", *r.models], rows


def _footnotes(r: ExperimentReport) -> list[str]:
    out = []
    for s in r.scalers:
        for m in r.models:
            if (s, m) in r.skips:
                out.append(f"/ {s} x {m}: {r.skips[(s, m)]}")
    return out + list(r.notes)


def render_report(r: ExperimentReport, fmt: str = "markdown") -> str:
    if fmt == "markdown":
        lines = [f"# {r.experiment}", ""]
        for metric, stat, header, rows in _tables(r):
            lines += [f"## {metric} ({stat})", "",
                      "| " + " | ".join(header) + " |",
                      "|" + "---|" * len(header)]
            lines += ["| " + " | ".join(row) + " |" for row in rows]
            lines.append("")
        notes = _footnotes(r)
        if notes:
            lines += ["Notes:", ""] + [f"- {n}" for n in notes] + [""]
        return "\n".join(lines)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "stat", "scaler", *r.models])
        for metric, stat, _, rows in _tables(r):
            for row in rows:
                w.writerow([metric, stat, *row])
        for n in _footnotes(r):
            w.writerow([f"# {n}"])
        return buf.getvalue()
    raise ArgumentError(f"unknown report format {fmt!r}")
