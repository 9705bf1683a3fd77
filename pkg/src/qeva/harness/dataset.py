"""Dataset ingestion and human-score aggregation.

A dataset root holds four JSONL files: videos.jsonl (media references),
references.jsonl (one human-written summary per video), candidates.jsonl
(system summaries under evaluation), annotations.jsonl (per-criterion
Likert judgments). Loading validates every record and cross-reference
with file and line numbers; corpus-shape expectations that real-world
data may not meet (two annotators per summary, four systems per video)
are reported as warnings, never errors.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..core import AnnotationRecord, Dimension, MediaRef, Summary
from ..errors import MissingAnnotation, ReferentialError, SchemaError

log = logging.getLogger(__name__)

OVERALL = "overall"

FILES = {
    "videos": "videos.jsonl",
    "references": "references.jsonl",
    "candidates": "candidates.jsonl",
    "annotations": "annotations.jsonl",
}


@dataclass
class Dataset:
    videos: list[MediaRef]
    references: dict[str, Summary]
    candidates: list[Summary]
    annotations: list[AnnotationRecord]
    warnings: list[str] = field(default_factory=list)

    def video_by_id(self, video_id: str) -> MediaRef:
        try:
            return self._video_index[video_id]
        except KeyError:
            raise ReferentialError(f"unknown video id {video_id!r}") from None

    def candidate_by_id(self, summary_id: str) -> Summary:
        try:
            return self._candidate_index[summary_id]
        except KeyError:
            raise ReferentialError(f"unknown summary id {summary_id!r}") from None

    def systems(self) -> list[str]:
        return sorted({c.system for c in self.candidates})

    def __post_init__(self):
        self._video_index = {v.id: v for v in self.videos}
        self._candidate_index = {c.id: c for c in self.candidates}


def _load_records(path: Path, from_dict):
    """Parse one JSONL file, tagging every failure with file:line."""
    if not path.is_file():
        raise SchemaError(f"{path} is missing")
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                records.append((lineno, from_dict(raw)))
            except SchemaError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc
    return records


def load_dataset(root: str | Path) -> Dataset:
    """Load and fully validate the four-file dataset under root."""
    root = Path(root)
    videos = _load_records(root / FILES["videos"], MediaRef.from_dict)
    # frame dirs may be stored relative to the dataset root, so a checked-in
    # corpus works from any working directory
    videos = [
        (lineno, replace(v, frame_dir=str(root / v.frame_dir)))
        if v.frame_dir and not Path(v.frame_dir).is_absolute()
        else (lineno, v)
        for lineno, v in videos
    ]
    references = _load_records(root / FILES["references"], Summary.from_dict)
    candidates = _load_records(root / FILES["candidates"], Summary.from_dict)
    annotations = _load_records(root / FILES["annotations"], AnnotationRecord.from_dict)

    video_ids = set()
    for lineno, video in videos:
        if video.id in video_ids:
            raise SchemaError(
                f"{root / FILES['videos']}:{lineno}: duplicate video id {video.id!r}"
            )
        video_ids.add(video.id)

    ref_map: dict[str, Summary] = {}
    for lineno, ref in references:
        where = f"{root / FILES['references']}:{lineno}"
        if ref.video_id not in video_ids:
            raise ReferentialError(
                f"{where}: reference {ref.id!r} names unknown video {ref.video_id!r}"
            )
        if ref.video_id in ref_map:
            raise SchemaError(f"{where}: second reference for video {ref.video_id!r}")
        ref_map[ref.video_id] = ref

    warnings: list[str] = []
    candidate_ids = set()
    seen_pairs = set()
    for lineno, cand in candidates:
        where = f"{root / FILES['candidates']}:{lineno}"
        if cand.video_id not in video_ids:
            raise ReferentialError(
                f"{where}: candidate {cand.id!r} names unknown video {cand.video_id!r}"
            )
        if cand.id in candidate_ids:
            raise SchemaError(f"{where}: duplicate summary id {cand.id!r}")
        if (cand.video_id, cand.system) in seen_pairs:
            raise SchemaError(
                f"{where}: second {cand.system!r} summary for video {cand.video_id!r}"
            )
        candidate_ids.add(cand.id)
        seen_pairs.add((cand.video_id, cand.system))

    seen_keys = set()
    for lineno, ann in annotations:
        where = f"{root / FILES['annotations']}:{lineno}"
        if ann.summary_id not in candidate_ids:
            raise ReferentialError(
                f"{where}: annotation names unknown summary {ann.summary_id!r}"
            )
        key = (ann.annotator_id, ann.summary_id, ann.criterion)
        if key in seen_keys:
            raise SchemaError(
                f"{where}: duplicate annotation {ann.annotator_id!r} on "
                f"{ann.summary_id!r} for {ann.criterion.value}"
            )
        seen_keys.add(key)

    ds = Dataset(
        videos=[v for _, v in videos],
        references=ref_map,
        candidates=[c for _, c in candidates],
        annotations=[a for _, a in annotations],
        warnings=warnings,
    )
    _shape_warnings(ds)
    for message in ds.warnings:
        log.warning("%s", message)
    return ds


def _shape_warnings(ds: Dataset) -> None:
    """Corpus-shape expectations; deviations are informational only."""
    systems = ds.systems()
    if ds.videos and len(ds.candidates) != len(ds.videos) * len(systems):
        ds.warnings.append(
            f"{len(ds.candidates)} candidates != {len(ds.videos)} videos x "
            f"{len(systems)} systems (some videos lack some systems)"
        )
    per_unit: dict[tuple[str, Dimension], int] = {}
    for ann in ds.annotations:
        key = (ann.summary_id, ann.criterion)
        per_unit[key] = per_unit.get(key, 0) + 1
    off = sorted(
        {sid for (sid, _), count in per_unit.items() if count != 2}
    )
    if off:
        ds.warnings.append(
            f"{len(off)} summaries do not have exactly 2 annotators per "
            f"criterion (first: {off[0]})"
        )
    missing_refs = sorted(v.id for v in ds.videos if v.id not in ds.references)
    if missing_refs:
        ds.warnings.append(
            f"{len(missing_refs)} videos lack a reference summary "
            f"(first: {missing_refs[0]}); reference baselines will skip them"
        )


def aggregate_human(ds: Dataset, criterion: Dimension | str) -> dict[str, float]:
    """Per-summary mean annotator score for one criterion.

    criterion OVERALL averages the three per-criterion means with equal
    weight. Candidates without a single annotation for a requested
    criterion make the aggregate undefined and raise MissingAnnotation.
    """
    if criterion == OVERALL:
        per_dim = [aggregate_human(ds, dim) for dim in Dimension]
        return {
            sid: sum(scores[sid] for scores in per_dim) / len(per_dim)
            for sid in per_dim[0]
        }
    criterion = Dimension(criterion)
    totals: dict[str, list[int]] = {c.id: [] for c in ds.candidates}
    for ann in ds.annotations:
        if ann.criterion is criterion:
            totals[ann.summary_id].append(ann.score)
    uncovered = sorted(sid for sid, scores in totals.items() if not scores)
    if uncovered:
        raise MissingAnnotation(uncovered, criterion.value)
    return {sid: sum(scores) / len(scores) for sid, scores in totals.items()}
