"""Metric execution over a dataset, with resumable persisted runs.

A MetricRun file records per-summary scores plus the manifest (backend
ids, template versions, seed, sampling sizes) and a hash of everything
that determines the output. Reruns pointing at the same file skip ids
already scored when the config hash matches, and start fresh when it
does not. Progress is written after every item, so an interrupted run
loses at most the item in flight.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..baselines import bleu_n, rouge_l, tokenize
from ..core import Dimension, DimensionScore, canonical_dumps
from ..errors import ConfigError, SchemaError
from ..qagen.templates import template_versions
from .dataset import Dataset
from .pipeline import EvaluationResult, PipelineConfig, VideoCache, evaluate_pair

log = logging.getLogger(__name__)

BASELINE_METRICS = ("bleu1", "bleu2", "bleu3", "bleu4", "rougel")
QEVA_METRIC = "qeva"


@dataclass
class MetricRun:
    metric_name: str
    per_summary: dict[str, float]
    config_hash: str
    manifest: dict
    components: dict[str, dict[str, DimensionScore]] = field(default_factory=dict)
    excluded: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for sid, value in self.per_summary.items():
            if not math.isfinite(value):
                raise SchemaError(f"non-finite score {value} for {sid!r}")

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "per_summary": self.per_summary,
            "config_hash": self.config_hash,
            "manifest": self.manifest,
            "components": {
                sid: {dim: score.to_dict() for dim, score in comps.items()}
                for sid, comps in self.components.items()
            },
            "excluded": self.excluded,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricRun":
        return cls(
            metric_name=d["metric_name"],
            per_summary=dict(d["per_summary"]),
            config_hash=d["config_hash"],
            manifest=d["manifest"],
            components={
                sid: {
                    dim: DimensionScore.from_dict(score)
                    for dim, score in comps.items()
                }
                for sid, comps in d.get("components", {}).items()
            },
            excluded=dict(d.get("excluded", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(canonical_dumps(self.to_dict()) + "\n", "utf-8")


def load_metric_run(path: str | Path) -> MetricRun:
    path = Path(path)
    try:
        return MetricRun.from_dict(json.loads(path.read_text("utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SchemaError(f"{path} is not a MetricRun file: {exc}") from exc


def config_hash_of(manifest: dict) -> str:
    return hashlib.sha256(canonical_dumps(manifest).encode("utf-8")).hexdigest()


def _resume(out: Path, manifest: dict, metric_name: str) -> MetricRun:
    config_hash = config_hash_of(manifest)
    if out.is_file():
        previous = load_metric_run(out)
        if previous.config_hash == config_hash:
            log.info(
                "resuming %s: %d summaries already scored",
                out,
                len(previous.per_summary),
            )
            return previous
        log.warning("config changed for %s; rescoring from scratch", out)
    return MetricRun(
        metric_name=metric_name,
        per_summary={},
        config_hash=config_hash,
        manifest=manifest,
    )


def run_qeva(
    ds: Dataset,
    cfg: PipelineConfig,
    out: str | Path,
    artifacts_out: str | Path | None = None,
) -> MetricRun:
    """Evaluate every candidate; insufficient-question items are excluded.

    artifacts_out, when given, receives one JSON line per evaluated
    summary holding its questions, filter statuses, and graded answers.
    """
    out = Path(out)
    manifest = {
        "metric_name": QEVA_METRIC,
        "config": cfg.describe(),
        "template_versions": template_versions(),
    }
    run = _resume(out, manifest, QEVA_METRIC)
    cache = VideoCache()
    artifacts_fh = None
    if artifacts_out is not None:
        artifacts_fh = Path(artifacts_out).open("a", encoding="utf-8")
    try:
        for candidate in ds.candidates:
            if candidate.id in run.per_summary or candidate.id in run.excluded:
                continue
            video = ds.video_by_id(candidate.video_id)
            result: EvaluationResult = evaluate_pair(video, candidate, cfg, cache)
            if result.score is None:
                run.excluded[candidate.id] = (
                    "insufficient questions: " + ", ".join(result.empty_dimensions)
                )
            else:
                run.per_summary[candidate.id] = result.score.overall
                run.components[candidate.id] = {
                    dim.value: score
                    for dim, score in result.score.components.items()
                }
            if artifacts_fh is not None:
                artifacts_fh.write(canonical_dumps(result.to_dict()) + "\n")
                artifacts_fh.flush()
            run.save(out)
    finally:
        if artifacts_fh is not None:
            artifacts_fh.close()
    run.save(out)
    return run


def run_baseline(ds: Dataset, metric_name: str, out: str | Path) -> MetricRun:
    """Reference-based baseline over every candidate with a reference."""
    if metric_name not in BASELINE_METRICS:
        raise ConfigError(
            f"unknown baseline {metric_name!r}; choose from {BASELINE_METRICS}"
        )
    out = Path(out)
    manifest = {"metric_name": metric_name, "config": {"tokenizer": "v1"}}
    run = _resume(out, manifest, metric_name)
    for candidate in ds.candidates:
        if candidate.id in run.per_summary or candidate.id in run.excluded:
            continue
        reference = ds.references.get(candidate.video_id)
        if reference is None:
            run.excluded[candidate.id] = "no reference summary for its video"
            run.save(out)
            continue
        cand_tokens = tokenize(candidate.text)
        ref_tokens = tokenize(reference.text)
        if metric_name == "rougel":
            value = rouge_l(cand_tokens, ref_tokens).f
        else:
            value = bleu_n(cand_tokens, ref_tokens, int(metric_name[-1]))
        run.per_summary[candidate.id] = value
        run.save(out)
    run.save(out)
    return run


def run_metric(
    ds: Dataset,
    metric_name: str,
    out: str | Path,
    cfg: PipelineConfig | None = None,
    artifacts_out: str | Path | None = None,
) -> MetricRun:
    if metric_name == QEVA_METRIC:
        if cfg is None:
            raise ConfigError("qeva runs need a PipelineConfig")
        return run_qeva(ds, cfg, out, artifacts_out)
    return run_baseline(ds, metric_name, out)
