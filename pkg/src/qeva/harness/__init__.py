"""Dataset ingestion, metric runs, and correlation reporting."""

from .dataset import FILES, OVERALL, Dataset, aggregate_human, load_dataset
from .figures import render_figures, report_bar_figure, scatter_figure
from .pipeline import (
    EvaluationResult,
    PipelineConfig,
    VideoCache,
    chronology_seed,
    evaluate_pair,
    video_questions,
)
from .reports import (
    Report,
    ReportRow,
    correlate_pairs,
    correlation_report,
    criterion_report,
    render_text,
    render_tsv,
)
from .runs import (
    BASELINE_METRICS,
    QEVA_METRIC,
    MetricRun,
    config_hash_of,
    load_metric_run,
    run_baseline,
    run_metric,
    run_qeva,
)

__all__ = [
    "FILES",
    "OVERALL",
    "Dataset",
    "aggregate_human",
    "load_dataset",
    "render_figures",
    "report_bar_figure",
    "scatter_figure",
    "EvaluationResult",
    "PipelineConfig",
    "VideoCache",
    "chronology_seed",
    "evaluate_pair",
    "video_questions",
    "Report",
    "ReportRow",
    "correlate_pairs",
    "correlation_report",
    "criterion_report",
    "render_text",
    "render_tsv",
    "BASELINE_METRICS",
    "QEVA_METRIC",
    "MetricRun",
    "config_hash_of",
    "load_metric_run",
    "run_baseline",
    "run_metric",
    "run_qeva",
]
