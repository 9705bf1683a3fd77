"""Figure rendering for correlation reports.

Written next to the delimited report output so a run directory is
self-contained: a grouped bar chart of the three correlation statistics
per metric row, and one metric-vs-human scatter per run. PNG metadata
is stripped so identical runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be pinned first

from .reports import METHODS, Report
from .runs import MetricRun

_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}
_METHOD_LABELS = {"tau_b": "Kendall tau_b", "tau_c": "Kendall tau_c", "rho": "Spearman rho"}


def report_bar_figure(report: Report, path: str | Path) -> Path:
    """Grouped bars, one cluster per report row; degenerate rows appear
    as empty clusters so their absence is visible."""
    path = Path(path)
    labels = [row.label for row in report.rows]
    positions = range(len(labels))
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(labels)), 3.5))
    for k, method in enumerate(METHODS):
        offsets = [p + (k - 1) * width for p in positions]
        drawn = [
            row.cells[method][0] if method in row.cells else 0.0
            for row in report.rows
        ]
        ax.bar(offsets, drawn, width=width, label=_METHOD_LABELS[method])
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("correlation")
    ax.set_ylim(-1.0, 1.0)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.legend(fontsize="small")
    ax.set_title(report.title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def scatter_figure(
    run: MetricRun, human: dict[str, float], path: str | Path, target: str
) -> Path:
    """Metric score against the human aggregate, one point per summary."""
    path = Path(path)
    ids = sorted(set(run.per_summary) & set(human))
    x = [human[i] for i in ids]
    y = [run.per_summary[i] for i in ids]
    fig, ax = plt.subplots(figsize=(4.0, 4.0))
    ax.scatter(x, y, s=24)
    ax.set_xlabel(f"human {target}")
    ax.set_ylabel(run.metric_name)
    ax.set_title(f"{run.metric_name} vs human ({len(ids)} summaries)")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def render_figures(
    report: Report,
    runs: list[MetricRun],
    human: dict[str, float],
    out_dir: str | Path,
    stem: str = "report",
) -> list[Path]:
    """All figures for one report into out_dir; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [report_bar_figure(report, out_dir / f"{stem}_correlations.png")]
    for run in runs:
        written.append(
            scatter_figure(
                run,
                human,
                out_dir / f"{stem}_scatter_{run.metric_name}.png",
                report.target,
            )
        )
    return written
