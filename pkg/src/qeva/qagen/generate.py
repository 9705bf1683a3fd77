"""Model-backed question generation for Coverage and Factuality, plus
event-timeline extraction for Chronology.

Each operation sends one templated request, parses the strict-JSON
reply, drops malformed items, and retries the whole request once when
the reply is not a JSON array before giving up with GenerationEmpty.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..backends.base import Backend, DecodeParams, ModelRequest
from ..core import ClaimCheck, Dimension, MediaRef, MultipleChoice, Origin, QAPair, Summary
from ..errors import GenerationEmpty, SchemaError, TimelineTooShort, ValidationError
from . import templates

REPROMPT_SUFFIX = (
    "\n\nYour previous reply could not be parsed. Reply with the strict "
    "JSON array only: no prose, no explanation."
)


class ElementCategory(str, enum.Enum):
    ENTITY = "entity"
    ACTION = "action"
    ATTRIBUTE = "attribute"
    COUNTING = "counting"
    OTHER = "other"


@dataclass(frozen=True)
class SalientElement:
    category: ElementCategory
    span: str

    def to_dict(self) -> dict:
        return {"category": self.category.value, "span": self.span}


@dataclass(frozen=True)
class TimelineEvent:
    index: int
    description: str


@dataclass(frozen=True)
class EventTimeline:
    video_id: str
    events: tuple[TimelineEvent, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        for i, event in enumerate(self.events):
            if event.index != i:
                raise SchemaError(
                    f"timeline indices must be contiguous from 0, got {event.index} at {i}"
                )
            if not event.description.strip():
                raise SchemaError("timeline event descriptions must be non-empty")
        descriptions = [e.description for e in self.events]
        if len(set(descriptions)) != len(descriptions):
            raise SchemaError("timeline event descriptions must be distinct")

    def __len__(self) -> int:
        return len(self.events)

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "events": [e.description for e in self.events],
        }


def _generate_array(backend: Backend, request: ModelRequest, validate) -> list:
    """One request, one reprompt on array-level parse failure."""
    from .parsing import parse_items

    response = backend.complete(request)
    items = parse_items(response.text, validate)
    if items is None:
        retry_prompts = tuple(
            (role, text + REPROMPT_SUFFIX if role == "user" else text)
            for role, text in request.role_prompts
        )
        retry = ModelRequest(retry_prompts, media=request.media, decode=request.decode)
        items = parse_items(backend.complete(retry).text, validate)
    if not items:
        raise GenerationEmpty(
            f"backend {backend.backend_id!r} produced no parseable items"
        )
    return items


def generate_coverage_qa(
    video: MediaRef,
    n: int,
    vlmm: Backend,
    decode: DecodeParams = DecodeParams(),
) -> list[QAPair]:
    """Up to n four-way multiple-choice questions derived from the video."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    prompt = templates.render("coverage_generate", N=str(n))
    request = ModelRequest((("user", prompt),), media=video, decode=decode)

    def validate(raw) -> dict | None:
        if not isinstance(raw, dict):
            return None
        question = raw.get("question")
        choices = raw.get("choices")
        idx = raw.get("answer_index")
        if not isinstance(question, str) or not question.strip():
            return None
        if not isinstance(choices, list) or len(choices) != 4:
            return None
        if not all(isinstance(c, str) and c.strip() for c in choices):
            return None
        if len(set(choices)) != 4:
            return None
        if not isinstance(idx, int) or isinstance(idx, bool) or not 0 <= idx < 4:
            return None
        return {"question": question.strip(), "choices": choices, "answer_index": idx}

    items = _generate_array(vlmm, request, validate)
    return [
        QAPair(
            id=f"{video.id}-cov-{i:03d}",
            dimension=Dimension.COVERAGE,
            question=item["question"],
            format=MultipleChoice(tuple(item["choices"]), item["answer_index"]),
            origin=Origin.FROM_VIDEO,
        )
        for i, item in enumerate(items[:n])
    ]


def extract_salient_elements(
    summary: Summary,
    llm: Backend,
    max_elements: int = 10,
    decode: DecodeParams = DecodeParams(),
) -> list[SalientElement]:
    """Spans worth fact-checking, verbatim from the summary text."""
    prompt = templates.render(
        "salient_extract", N=str(max_elements), SUMMARY=summary.text
    )
    request = ModelRequest((("user", prompt),), decode=decode)
    normalized_summary = _normalize_ws(summary.text)

    def validate(raw) -> SalientElement | None:
        if not isinstance(raw, dict):
            return None
        span = raw.get("span")
        if not isinstance(span, str) or not span.strip():
            return None
        span = _normalize_ws(span)
        if span not in normalized_summary:
            return None  # hallucinated span
        category = raw.get("category")
        try:
            cat = ElementCategory(str(category).strip().lower())
        except ValueError:
            cat = ElementCategory.OTHER
        return SalientElement(category=cat, span=span)

    return _generate_array(llm, request, validate)


def generate_factuality_qa(
    summary: Summary,
    elements: list[SalientElement],
    n: int,
    llm: Backend,
    decode: DecodeParams = DecodeParams(),
) -> list[QAPair]:
    """One declarative claim per salient element, capped at n."""
    if not elements:
        raise ValidationError("generate_factuality_qa needs at least one element")
    selected = elements[:n]
    element_lines = "\n".join(
        f"- {el.span} ({el.category.value})" for el in selected
    )
    prompt = templates.render(
        "factuality_claims", SUMMARY=summary.text, ELEMENTS=element_lines
    )
    request = ModelRequest((("user", prompt),), decode=decode)

    def validate(raw) -> str | None:
        if not isinstance(raw, dict):
            return None
        claim = raw.get("claim")
        if not isinstance(claim, str) or not claim.strip():
            return None
        return claim.strip()

    claims = _generate_array(llm, request, validate)
    return [
        QAPair(
            id=f"{summary.id}-fact-{i:03d}",
            dimension=Dimension.FACTUALITY,
            question=claim,
            format=ClaimCheck(claim),
            origin=Origin.FROM_SUMMARY,
        )
        for i, claim in enumerate(claims[: len(selected)])
    ]


def extract_event_timeline(
    video: MediaRef,
    vlmm: Backend,
    decode: DecodeParams = DecodeParams(),
) -> EventTimeline:
    """Ordered key events; duplicates collapse to their first occurrence."""
    prompt = templates.render("timeline_extract")
    request = ModelRequest((("user", prompt),), media=video, decode=decode)

    def validate(raw) -> str | None:
        if not isinstance(raw, dict):
            return None
        event = raw.get("event")
        if not isinstance(event, str) or not event.strip():
            return None
        return _normalize_ws(event)

    try:
        descriptions = _generate_array(vlmm, request, validate)
    except GenerationEmpty as exc:
        raise TimelineTooShort(str(exc)) from exc

    seen: dict[str, None] = {}
    for desc in descriptions:
        seen.setdefault(desc, None)
    deduped = list(seen)
    if len(deduped) < 2:
        raise TimelineTooShort(
            f"video {video.id!r}: {len(deduped)} distinct event(s), need >= 2"
        )
    return EventTimeline(
        video_id=video.id,
        events=tuple(
            TimelineEvent(index=i, description=d) for i, d in enumerate(deduped)
        ),
    )


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())
