"""Generate → filter → answer → grade for one (video, summary) pair.

Video-derived work (coverage questions, the event timeline, chronology
questions, and filter decisions about them) depends only on the video,
so it is computed once per video and shared across that video's
candidate summaries through an in-process cache. Factuality claims are
per-summary by construction.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

from ..backends.base import Backend, DecodeParams
from ..core import Dimension, MediaRef, QAPair, QevaScore, Summary
from ..errors import EmptyDimension, GenerationEmpty, TimelineTooShort
from ..filtering import FilterConfig, FilterReport, filter_pipeline
from ..qagen import (
    extract_event_timeline,
    extract_salient_elements,
    generate_chronology_qa,
    generate_coverage_qa,
    generate_factuality_qa,
)
from ..scoring import (
    GradedAnswer,
    answer_questions,
    grade_answer,
    qeva_score,
    score_dimension,
)

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    """Model roles and sampling parameters for one evaluation run."""

    video_model: Backend
    text_model: Backend
    filter_trivial_model: Backend
    filter_quality_model: Backend
    n_coverage: int = 10
    n_factuality: int = 10
    n_chronology: int = 10
    seed: int = 0
    decode: DecodeParams = field(default_factory=DecodeParams)
    max_concurrency: int = 4

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            trivial_model=self.filter_trivial_model,
            quality_model=self.filter_quality_model,
            generator_id=self.video_model.backend_id,
            decode=self.decode,
            max_concurrency=self.max_concurrency,
        )

    def describe(self) -> dict:
        """Everything that determines outputs, for manifests and hashing."""
        return {
            "backends": {
                "video": self.video_model.backend_id,
                "text": self.text_model.backend_id,
                "filter_trivial": self.filter_trivial_model.backend_id,
                "filter_quality": self.filter_quality_model.backend_id,
            },
            "n_coverage": self.n_coverage,
            "n_factuality": self.n_factuality,
            "n_chronology": self.n_chronology,
            "seed": self.seed,
            "decode": self.decode.to_dict(),
        }


class VideoCache:
    """Per-video artifacts reused across the video's summaries."""

    def __init__(self):
        self.video_qas: dict[str, list[QAPair] | Exception] = {}
        self.filter_cache: dict = {}


@dataclass
class EvaluationResult:
    summary_id: str
    video_id: str
    questions: list[QAPair]
    filter_counts: dict[str, int]
    filter_errors: list[tuple[str, str]]
    graded: list[GradedAnswer]
    score: QevaScore | None
    empty_dimensions: list[str]

    @property
    def excluded(self) -> bool:
        return self.score is None

    def to_dict(self) -> dict:
        return {
            "summary_id": self.summary_id,
            "video_id": self.video_id,
            "questions": [qa.to_dict() for qa in self.questions],
            "filter_counts": self.filter_counts,
            "filter_errors": [list(e) for e in self.filter_errors],
            "graded": [g.to_dict() for g in self.graded],
            "score": self.score.to_dict() if self.score else None,
            "empty_dimensions": self.empty_dimensions,
        }


def chronology_seed(seed: int, video_id: str) -> int:
    """Stable per-video sampling seed derived from the run seed."""
    digest = hashlib.sha256(f"{seed}:{video_id}".encode("utf-8")).hexdigest()
    return int(digest[:12], 16)


def video_questions(
    video: MediaRef, cfg: PipelineConfig, cache: VideoCache | None = None
) -> list[QAPair]:
    """Coverage + chronology questions for one video, cached per video.

    A video whose timeline is too short for chronology sampling (or that
    yields zero parseable coverage questions) contributes an empty list
    for that dimension; the affected summaries surface it as an empty
    dimension after filtering.
    """
    if cache is not None and video.id in cache.video_qas:
        hit = cache.video_qas[video.id]
        if isinstance(hit, Exception):
            raise hit
        return hit

    qas: list[QAPair] = []
    try:
        try:
            qas.extend(
                generate_coverage_qa(video, cfg.n_coverage, cfg.video_model, cfg.decode)
            )
        except GenerationEmpty as exc:
            log.warning("coverage generation empty for %s: %s", video.id, exc)
        try:
            timeline = extract_event_timeline(video, cfg.video_model, cfg.decode)
            qas.extend(
                generate_chronology_qa(
                    timeline, cfg.n_chronology, chronology_seed(cfg.seed, video.id)
                )
            )
        except TimelineTooShort as exc:
            log.warning("no usable timeline for %s: %s", video.id, exc)
    except Exception as exc:
        if cache is not None:
            cache.video_qas[video.id] = exc
        raise
    if cache is not None:
        cache.video_qas[video.id] = qas
    return qas


def evaluate_pair(
    video: MediaRef,
    summary: Summary,
    cfg: PipelineConfig,
    cache: VideoCache | None = None,
) -> EvaluationResult:
    """Full metric computation for one candidate summary."""
    if summary.video_id != video.id:
        raise ValueError(
            f"summary {summary.id} is for video {summary.video_id}, not {video.id}"
        )
    qas = list(video_questions(video, cfg, cache))
    try:
        elements = extract_salient_elements(
            summary, cfg.text_model, cfg.n_factuality, cfg.decode
        )
        qas.extend(
            generate_factuality_qa(
                summary, elements, cfg.n_factuality, cfg.text_model, cfg.decode
            )
        )
    except GenerationEmpty as exc:
        log.warning("no factuality claims for %s: %s", summary.id, exc)

    report: FilterReport = filter_pipeline(
        qas,
        video,
        summary,
        cfg.filter_config(),
        cache.filter_cache if cache is not None else None,
    )
    kept = report.kept
    by_dim = {
        dim: [qa for qa in kept if qa.dimension is dim] for dim in Dimension
    }

    qa_index = {qa.id: qa for qa in kept}
    graded: list[GradedAnswer] = []
    summary_side = by_dim[Dimension.COVERAGE] + by_dim[Dimension.CHRONOLOGY]
    answers = answer_questions(
        summary_side, summary, cfg.text_model, cfg.decode, cfg.max_concurrency
    )
    answers += answer_questions(
        by_dim[Dimension.FACTUALITY], video, cfg.video_model, cfg.decode,
        cfg.max_concurrency,
    )
    for qa_id, raw in answers:
        graded.append(grade_answer(qa_index[qa_id], raw))

    graded_by_dim = {dim: [] for dim in Dimension}
    for grade in graded:
        graded_by_dim[qa_index[grade.qa_id].dimension].append(grade)

    components = {}
    empty: list[str] = []
    for dim in Dimension:
        try:
            components[dim] = score_dimension(graded_by_dim[dim], dim)
        except EmptyDimension:
            empty.append(dim.value)
    score = None
    if not empty:
        score = qeva_score(
            summary.id,
            components[Dimension.COVERAGE],
            components[Dimension.FACTUALITY],
            components[Dimension.CHRONOLOGY],
        )
    return EvaluationResult(
        summary_id=summary.id,
        video_id=video.id,
        questions=report.items,
        filter_counts=report.counts(),
        filter_errors=report.errors,
        graded=graded,
        score=score,
        empty_dimensions=empty,
    )
