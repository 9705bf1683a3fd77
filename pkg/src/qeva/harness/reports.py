"""Correlation reports over metric runs and human aggregates.

A report is a set of rows, one per metric (or per criterion), each
carrying τ_b, τ_c, and ρ with two-sided p-values over the id
intersection of the run and the human aggregate. Rows whose sample is
degenerate (constant scores, or fewer than two overlapping ids) stay
listed, marked with an em dash, so a report never silently drops a
metric. Rendering: canonical JSON, a fixed-width text table shaped like
the familiar metric-correlation tables, and TSV for spreadsheets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core import Dimension, DimensionScore, canonical_dumps
from ..errors import DegenerateSample
from ..stats import kendall_tau_b, kendall_tau_c, spearman_rho
from .dataset import OVERALL
from .runs import MetricRun

DASH = "—"
METHODS = ("tau_b", "tau_c", "rho")


@dataclass
class ReportRow:
    label: str
    n: int
    cells: dict[str, tuple[float, float]] = field(default_factory=dict)
    degenerate: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        d = {"label": self.label, "n": self.n, "degenerate": self.degenerate}
        for method in METHODS:
            if method in self.cells:
                stat, p = self.cells[method]
                d[method] = stat
                d[f"{method}_p"] = p
            else:
                d[method] = None
                d[f"{method}_p"] = None
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class Report:
    title: str
    target: str
    rows: list[ReportRow]
    sections: dict[str, list[ReportRow]] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "target": self.target,
            "rows": [r.to_dict() for r in self.rows],
            "sections": {
                name: [r.to_dict() for r in rows]
                for name, rows in self.sections.items()
            },
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return canonical_dumps(self.to_dict()) + "\n"


def correlate_pairs(
    label: str, metric: dict, human: dict, strict_overlap: bool = True
) -> ReportRow:
    """One report row over the id intersection of two score maps.

    Fewer than two overlapping ids is a caller error when
    strict_overlap (the sample cannot exist); with it off, the row is
    returned marked degenerate instead (criterion rows use this, since
    a dimension may legitimately be excluded everywhere).
    """
    ids = sorted(set(metric) & set(human))
    x = [metric[i] for i in ids]
    y = [human[i] for i in ids]
    row = ReportRow(label=label, n=len(ids))
    if len(ids) < 2:
        if strict_overlap:
            raise DegenerateSample(
                f"{label}: only {len(ids)} summaries overlap between the "
                f"metric run and the human scores; need at least 2"
            )
        row.degenerate = True
        row.note = f"only {len(ids)} overlapping summaries"
        return row
    for method, fn in (
        ("tau_b", kendall_tau_b),
        ("tau_c", kendall_tau_c),
        ("rho", spearman_rho),
    ):
        try:
            result = fn(x, y)
            row.cells[method] = (result.statistic, result.p_value)
        except DegenerateSample as exc:
            row.degenerate = True
            if not row.note:
                row.note = str(exc)
    return row


def correlation_report(
    runs: list[MetricRun],
    human: dict[str, float],
    target: str = OVERALL,
    system_of: dict[str, str] | None = None,
    per_system: bool = False,
    system_filter: str | None = None,
) -> Report:
    """Metric rows against one human aggregate, Table-1 shaped.

    system_of maps summary_id to the producing system; it enables the
    optional per-system sections and the single-system filter.
    """
    if (per_system or system_filter) and system_of is None:
        raise ValueError("per-system breakdowns need a summary_id -> system map")

    def restrict(scores: dict, system: str) -> dict:
        return {
            sid: v for sid, v in scores.items() if system_of.get(sid) == system
        }

    rows = []
    meta_runs = {}
    for run in runs:
        scores = run.per_summary
        if system_filter is not None:
            scores = restrict(scores, system_filter)
        rows.append(correlate_pairs(run.metric_name, scores, human))
        meta_runs[run.metric_name] = {
            "config_hash": run.config_hash,
            "seed": run.manifest.get("config", {}).get("seed"),
            "excluded": len(run.excluded),
        }

    sections: dict[str, list[ReportRow]] = {}
    if per_system:
        # a system with one summary yields a dashed row, not a dead report
        systems = sorted(set(system_of.values()))
        for system in systems:
            sections[system] = [
                correlate_pairs(
                    run.metric_name,
                    restrict(run.per_summary, system),
                    human,
                    strict_overlap=False,
                )
                for run in runs
            ]

    title = "Correlation with human judgments"
    if system_filter:
        title += f" (system: {system_filter})"
    return Report(
        title=title,
        target=target,
        rows=rows,
        sections=sections,
        meta={"runs": meta_runs, "human_target": target},
    )


def criterion_report(
    components: dict[str, dict[str, DimensionScore]],
    human_by_criterion: dict[str, dict[str, float]],
    meta: dict | None = None,
) -> Report:
    """Per-criterion rows: each component score against the same-named
    human criterion aggregate, Table-3 shaped."""
    rows = []
    for dim in Dimension:
        metric_scores = {
            sid: comps[dim.value].value
            for sid, comps in components.items()
            if dim.value in comps
        }
        human = human_by_criterion.get(dim.value, {})
        if not metric_scores:
            row = ReportRow(label=dim.value, n=0, degenerate=True)
            row.note = "no component scores"
            rows.append(row)
            continue
        rows.append(
            correlate_pairs(dim.value, metric_scores, human, strict_overlap=False)
        )
    return Report(
        title="Per-criterion correlation with human judgments",
        target="matching criterion",
        rows=rows,
        meta=meta or {},
    )


# --- rendering --------------------------------------------------------------


def _cell_text(row: ReportRow, method: str) -> str:
    if method not in row.cells:
        return DASH
    stat, p = row.cells[method]
    return f"{stat:.4f} ({p:.4f})"


def render_text(report: Report) -> str:
    """Fixed-width table: metric, n, then stat (p) per correlation."""
    header = ["metric", "n", "tau_b (p)", "tau_c (p)", "rho (p)"]

    def table_lines(rows: list[ReportRow]) -> list[str]:
        body = [
            [row.label, str(row.n)] + [_cell_text(row, m) for m in METHODS]
            for row in rows
        ]
        widths = [
            max(len(header[col]), *(len(line[col]) for line in body)) if body
            else len(header[col])
            for col in range(len(header))
        ]
        fmt_row = lambda cells: "  ".join(
            cell.ljust(width) for cell, width in zip(cells, widths)
        ).rstrip()
        lines = [fmt_row(header), fmt_row(["-" * w for w in widths])]
        lines += [fmt_row(line) for line in body]
        for row in rows:
            if row.note:
                lines.append(f"  note [{row.label}]: {row.note}")
        return lines

    out = [report.title, f"human target: {report.target}", ""]
    out += table_lines(report.rows)
    for name in sorted(report.sections):
        out += ["", f"system: {name}"]
        out += table_lines(report.sections[name])
    excluded = {
        name: info["excluded"]
        for name, info in report.meta.get("runs", {}).items()
        if info.get("excluded")
    }
    if excluded:
        out.append("")
        for name, count in sorted(excluded.items()):
            out.append(f"excluded from {name}: {count} summaries")
    return "\n".join(out) + "\n"


def render_tsv(report: Report) -> str:
    """One header line, then one row per metric; sections get a column."""
    columns = ["section", "label", "n"]
    for method in METHODS:
        columns += [method, f"{method}_p"]
    columns.append("note")
    lines = ["\t".join(columns)]

    def emit(section: str, row: ReportRow):
        cells = [section, row.label, str(row.n)]
        for method in METHODS:
            if method in row.cells:
                stat, p = row.cells[method]
                cells += [repr(stat), repr(p)]
            else:
                cells += ["", ""]
        cells.append(row.note)
        lines.append("\t".join(cells))

    for row in report.rows:
        emit("", row)
    for name in sorted(report.sections):
        for row in report.sections[name]:
            emit(name, row)
    return "\n".join(lines) + "\n"
