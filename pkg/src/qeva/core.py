"""Domain types shared by every stage of the pipeline.

All types are frozen dataclasses: construction validates invariants, so an
instance that exists is valid, and instances are safe to share across
threads. Serialization is canonical JSON (sorted keys, compact separators,
ASCII) so equal values always produce byte-identical text; collections are
stored as JSONL, one record per line.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Union

from .errors import SchemaError


class Dimension(str, enum.Enum):
    COVERAGE = "coverage"
    FACTUALITY = "factuality"
    CHRONOLOGY = "chronology"


class Origin(str, enum.Enum):
    FROM_VIDEO = "from_video"
    FROM_SUMMARY = "from_summary"


class FilterStatus(str, enum.Enum):
    PENDING = "pending"
    KEPT = "kept"
    REMOVED_TRIVIAL = "removed_trivial"
    REMOVED_LOW_QUALITY = "removed_low_quality"


@dataclass(frozen=True)
class MediaRef:
    """Opaque handle to a source video; the core never decodes it."""

    id: str
    uri: str | None = None
    frame_dir: str | None = None
    duration_s: float | None = None

    def __post_init__(self):
        if not self.id:
            raise SchemaError("MediaRef.id must be non-empty")
        if (self.uri is None) == (self.frame_dir is None):
            raise SchemaError(
                f"MediaRef {self.id!r}: exactly one of uri/frame_dir must be set"
            )
        if self.duration_s is not None and self.duration_s < 0:
            raise SchemaError(f"MediaRef {self.id!r}: duration_s must be >= 0")

    def to_dict(self) -> dict:
        d: dict = {"id": self.id}
        if self.uri is not None:
            d["uri"] = self.uri
        if self.frame_dir is not None:
            d["frame_dir"] = self.frame_dir
        if self.duration_s is not None:
            d["duration_s"] = self.duration_s
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MediaRef":
        return cls(
            id=_req(d, "id", str),
            uri=_opt(d, "uri", str),
            frame_dir=_opt(d, "frame_dir", str),
            duration_s=_opt(d, "duration_s", (int, float)),
        )


@dataclass(frozen=True)
class Summary:
    """One candidate (or reference) summary of a video."""

    id: str
    video_id: str
    system: str
    text: str

    def __post_init__(self):
        if not self.id or not self.video_id or not self.system:
            raise SchemaError("Summary id, video_id and system must be non-empty")
        object.__setattr__(self, "text", self.text.strip())
        if not self.text:
            raise SchemaError(f"Summary {self.id!r}: text is empty after trimming")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "video_id": self.video_id,
            "system": self.system,
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Summary":
        return cls(
            id=_req(d, "id", str),
            video_id=_req(d, "video_id", str),
            system=_req(d, "system", str),
            text=_req(d, "text", str),
        )


@dataclass(frozen=True)
class MultipleChoice:
    choices: tuple[str, ...]
    gold_index: int

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(self.choices))
        if len(self.choices) < 2:
            raise SchemaError("MultipleChoice needs at least 2 choices")
        if len(set(self.choices)) != len(self.choices):
            raise SchemaError("MultipleChoice choices must be pairwise distinct")
        if not 0 <= self.gold_index < len(self.choices):
            raise SchemaError(
                f"MultipleChoice gold_index {self.gold_index} out of range "
                f"for {len(self.choices)} choices"
            )


@dataclass(frozen=True)
class YesNo:
    gold: bool


@dataclass(frozen=True)
class SortTask:
    """Arrange the listed events chronologically.

    gold_order[k] is the position (in `events`) of the k-th event in true
    chronological order, i.e. [events[i] for i in gold_order] is sorted by
    time of occurrence.
    """

    events: tuple[str, ...]
    gold_order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "gold_order", tuple(self.gold_order))
        if len(self.events) < 2:
            raise SchemaError("SortTask needs at least 2 events")
        if len(set(self.events)) != len(self.events):
            raise SchemaError("SortTask events must be pairwise distinct")
        if sorted(self.gold_order) != list(range(len(self.events))):
            raise SchemaError(
                f"SortTask gold_order {self.gold_order} is not a permutation "
                f"of 0..{len(self.events) - 1}"
            )


@dataclass(frozen=True)
class ClaimCheck:
    claim: str

    def __post_init__(self):
        if not self.claim.strip():
            raise SchemaError("ClaimCheck claim must be non-empty")


QAFormat = Union[MultipleChoice, YesNo, SortTask, ClaimCheck]

_FORMAT_KINDS = {
    "multiple_choice": MultipleChoice,
    "yes_no": YesNo,
    "sort": SortTask,
    "claim_check": ClaimCheck,
}
_KIND_BY_TYPE = {v: k for k, v in _FORMAT_KINDS.items()}


def _format_to_dict(fmt: QAFormat) -> dict:
    d = {"kind": _KIND_BY_TYPE[type(fmt)]}
    if isinstance(fmt, MultipleChoice):
        d.update(choices=list(fmt.choices), gold_index=fmt.gold_index)
    elif isinstance(fmt, YesNo):
        d.update(gold=fmt.gold)
    elif isinstance(fmt, SortTask):
        d.update(events=list(fmt.events), gold_order=list(fmt.gold_order))
    else:
        d.update(claim=fmt.claim)
    return d


def _format_from_dict(d: dict) -> QAFormat:
    kind = d.get("kind")
    if kind == "multiple_choice":
        return MultipleChoice(tuple(d["choices"]), int(d["gold_index"]))
    if kind == "yes_no":
        return YesNo(bool(d["gold"]))
    if kind == "sort":
        return SortTask(tuple(d["events"]), tuple(int(i) for i in d["gold_order"]))
    if kind == "claim_check":
        return ClaimCheck(str(d["claim"]))
    raise SchemaError(f"unknown QA format kind: {kind!r}")


@dataclass(frozen=True)
class QAPair:
    """One generated question with its gold answer and filter status."""

    id: str
    dimension: Dimension
    question: str
    format: QAFormat
    origin: Origin
    filtered: FilterStatus = FilterStatus.PENDING

    def __post_init__(self):
        if not self.id:
            raise SchemaError("QAPair.id must be non-empty")
        if not self.question.strip():
            raise SchemaError(f"QAPair {self.id!r}: question must be non-empty")
        if self.dimension in (Dimension.COVERAGE, Dimension.CHRONOLOGY):
            if self.origin is not Origin.FROM_VIDEO:
                raise SchemaError(
                    f"QAPair {self.id!r}: {self.dimension.value} questions must "
                    "originate from the video"
                )
        else:  # factuality
            if self.origin is not Origin.FROM_SUMMARY:
                raise SchemaError(
                    f"QAPair {self.id!r}: factuality questions must originate "
                    "from the summary"
                )
            if not isinstance(self.format, ClaimCheck):
                raise SchemaError(
                    f"QAPair {self.id!r}: factuality questions must be claim checks"
                )

    def with_status(self, status: FilterStatus) -> "QAPair":
        return QAPair(
            id=self.id,
            dimension=self.dimension,
            question=self.question,
            format=self.format,
            origin=self.origin,
            filtered=status,
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "dimension": self.dimension.value,
            "question": self.question,
            "format": _format_to_dict(self.format),
            "origin": self.origin.value,
            "filtered": self.filtered.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QAPair":
        try:
            dimension = Dimension(_req(d, "dimension", str))
            origin = Origin(_req(d, "origin", str))
            filtered = FilterStatus(d.get("filtered", "pending"))
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
        return cls(
            id=_req(d, "id", str),
            dimension=dimension,
            question=_req(d, "question", str),
            format=_format_from_dict(_req(d, "format", dict)),
            origin=origin,
            filtered=filtered,
        )


@dataclass(frozen=True)
class DimensionScore:
    """Proportion of correctly answered questions for one criterion.

    Kept as an exact integer pair; `value` is derived, so score equality
    can be tested without float tolerances.
    """

    dimension: Dimension
    correct: int
    total: int

    def __post_init__(self):
        if self.total < 1:
            raise SchemaError("DimensionScore.total must be >= 1")
        if not 0 <= self.correct <= self.total:
            raise SchemaError(
                f"DimensionScore correct={self.correct} outside 0..{self.total}"
            )

    @property
    def value(self) -> float:
        return self.correct / self.total

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension.value,
            "correct": self.correct,
            "total": self.total,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DimensionScore":
        score = cls(
            dimension=Dimension(_req(d, "dimension", str)),
            correct=_req(d, "correct", int),
            total=_req(d, "total", int),
        )
        if "value" in d and d["value"] != score.value:
            raise SchemaError(
                f"DimensionScore value {d['value']} != {score.correct}/{score.total}"
            )
        return score


@dataclass(frozen=True)
class QevaScore:
    """Per-summary result: the three component scores and their mean."""

    summary_id: str
    components: dict[Dimension, DimensionScore]
    overall: float | None = None

    def __post_init__(self):
        if not self.summary_id:
            raise SchemaError("QevaScore.summary_id must be non-empty")
        if set(self.components) != set(Dimension):
            missing = [d.value for d in Dimension if d not in self.components]
            raise SchemaError(f"QevaScore missing components: {missing}")
        for dim, score in self.components.items():
            if score.dimension is not dim:
                raise SchemaError(
                    f"component keyed {dim.value} holds a {score.dimension.value} score"
                )
        mean = sum(s.value for s in self.components.values()) / 3
        if self.overall is None:
            object.__setattr__(self, "overall", mean)
        elif abs(self.overall - mean) > 1e-15:
            raise SchemaError(
                f"QevaScore overall {self.overall} is not the component mean {mean}"
            )

    def to_dict(self) -> dict:
        return {
            "summary_id": self.summary_id,
            "components": {
                dim.value: self.components[dim].to_dict() for dim in Dimension
            },
            "overall": self.overall,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QevaScore":
        components = {
            Dimension(k): DimensionScore.from_dict(v)
            for k, v in _req(d, "components", dict).items()
        }
        return cls(
            summary_id=_req(d, "summary_id", str),
            components=components,
            overall=float(_req(d, "overall", (int, float))),
        )


@dataclass(frozen=True)
class AnnotationRecord:
    """One human Likert judgment of a summary on one criterion."""

    annotator_id: str
    summary_id: str
    criterion: Dimension
    score: int

    def __post_init__(self):
        if not self.annotator_id or not self.summary_id:
            raise SchemaError("AnnotationRecord ids must be non-empty")
        if not isinstance(self.score, int) or isinstance(self.score, bool):
            raise SchemaError("AnnotationRecord.score must be an integer")
        if not 1 <= self.score <= 5:
            raise SchemaError(
                f"AnnotationRecord.score {self.score} outside the 1..5 Likert range"
            )

    def to_dict(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "summary_id": self.summary_id,
            "criterion": self.criterion.value,
            "score": self.score,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        return cls(
            annotator_id=_req(d, "annotator_id", str),
            summary_id=_req(d, "summary_id", str),
            criterion=Dimension(_req(d, "criterion", str)),
            score=_req(d, "score", int),
        )


# --- canonical serialization ----------------------------------------------


def canonical_dumps(value) -> str:
    """Render a JSON-able dict (or a core type) as canonical JSON text."""
    if hasattr(value, "to_dict"):
        value = value.to_dict()
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def write_jsonl(path: str | Path, values: Iterable) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for value in values:
            fh.write(canonical_dumps(value))
            fh.write("\n")


def read_jsonl(path: str | Path, cls=None) -> Iterator:
    """Yield records from a JSONL file, as `cls` instances when given.

    Parse errors carry the 1-based line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if cls is None:
                yield raw
            else:
                try:
                    yield cls.from_dict(raw)
                except SchemaError as exc:
                    raise SchemaError(f"{path}:{lineno}: {exc}") from exc


def _req(d: dict, key: str, types) -> object:
    if key not in d:
        raise SchemaError(f"missing field {key!r}")
    value = d[key]
    if types is int and isinstance(value, bool):
        raise SchemaError(f"field {key!r} must be an integer, got bool")
    if not isinstance(value, types):
        raise SchemaError(f"field {key!r} has wrong type {type(value).__name__}")
    return value


def _opt(d: dict, key: str, types):
    if key not in d or d[key] is None:
        return None
    return _req(d, key, types)
