"""Question answering, deterministic grading, and score computation.

Coverage and Chronology questions are answered with the summary as the
only context: the answerer can only be right if the summary carries the
video's content. Factuality claims are answered with the video as
context and graded as a SUPPORTED/UNSUPPORTED verdict. Every dimension
score is the exact proportion of correct answers; the overall score is
the arithmetic mean of the three dimensions.
"""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass

from .core import (
    ClaimCheck,
    Dimension,
    DimensionScore,
    MediaRef,
    MultipleChoice,
    QAPair,
    QevaScore,
    SortTask,
    Summary,
    YesNo,
)
from .errors import EmptyDimension, SchemaError
from .backends.base import Backend, DecodeParams, ModelRequest, parallel_map
from .qagen import templates

log = logging.getLogger(__name__)

VERDICT_REPROMPT = (
    "Your previous reply was not a valid verdict. Reply with exactly one "
    'word: "SUPPORTED" or "UNSUPPORTED".'
)

_INT_RE = re.compile(r"\d+")


class GradeRule(str, enum.Enum):
    INDEX_MATCH = "index_match"
    YES_NO_MATCH = "yes_no_match"
    EXACT_PERMUTATION = "exact_permutation"
    SUPPORT_VERDICT = "support_verdict"
    PARSE_FAILURE = "parse_failure"


@dataclass(frozen=True)
class GradedAnswer:
    qa_id: str
    raw_text: str
    parsed: str | None
    correct: bool
    grade_rule: GradeRule

    def __post_init__(self):
        if self.grade_rule is GradeRule.PARSE_FAILURE and self.correct:
            raise SchemaError("a ParseFailure answer cannot be correct")

    def to_dict(self) -> dict:
        return {
            "qa_id": self.qa_id,
            "raw_text": self.raw_text,
            "parsed": self.parsed,
            "correct": self.correct,
            "grade_rule": self.grade_rule.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradedAnswer":
        return cls(
            qa_id=d["qa_id"],
            raw_text=d["raw_text"],
            parsed=d["parsed"],
            correct=d["correct"],
            grade_rule=GradeRule(d["grade_rule"]),
        )


# --- posing -----------------------------------------------------------------


def choice_lines(mc: MultipleChoice) -> str:
    return "\n".join(
        f"({chr(ord('A') + i)}) {text}" for i, text in enumerate(mc.choices)
    )


def event_lines(task: SortTask) -> str:
    return "\n".join(f"{i}: {text}" for i, text in enumerate(task.events))


def pose_request(
    qa: QAPair,
    context: Summary | MediaRef | None,
    decode: DecodeParams = DecodeParams(),
) -> ModelRequest:
    """Build the answering prompt for one question.

    context None poses the question bare (the trivial-filter probe);
    a Summary embeds its text; a MediaRef attaches the video and the
    prompt directs the model to it.
    """
    media = None
    if context is None:
        context_text = templates.CONTEXT_NONE
    elif isinstance(context, Summary):
        context_text = templates.summary_context(context.text)
    elif isinstance(context, MediaRef):
        context_text = templates.CONTEXT_VIDEO
        media = context
    else:
        raise SchemaError(f"unsupported context type {type(context).__name__}")

    fmt = qa.format
    if isinstance(fmt, MultipleChoice):
        prompt = templates.render(
            "answer_mc",
            CONTEXT=context_text,
            QUESTION=qa.question,
            CHOICES=choice_lines(fmt),
        )
    elif isinstance(fmt, YesNo):
        prompt = templates.render(
            "answer_yesno", CONTEXT=context_text, QUESTION=qa.question
        )
    elif isinstance(fmt, SortTask):
        prompt = templates.render(
            "answer_sort",
            CONTEXT=context_text,
            QUESTION=qa.question,
            EVENTS=event_lines(fmt),
        )
    elif isinstance(fmt, ClaimCheck):
        prompt = templates.render(
            "answer_claim", CONTEXT=context_text, QUESTION=fmt.claim
        )
    else:
        raise SchemaError(f"unsupported question format {type(fmt).__name__}")
    return ModelRequest((("user", prompt),), media=media, decode=decode)


def ask_one(
    model: Backend,
    qa: QAPair,
    context: Summary | MediaRef | None,
    decode: DecodeParams = DecodeParams(),
) -> str:
    """One answering call; ClaimCheck gets a single reprompt if the first
    reply is not a parseable verdict. Backend errors propagate."""
    request = pose_request(qa, context, decode)
    raw = model.complete(request).text
    if isinstance(qa.format, ClaimCheck) and parse_verdict(raw) is None:
        retry = ModelRequest(
            request.role_prompts + (("user", VERDICT_REPROMPT),),
            media=request.media,
            decode=decode,
        )
        raw = model.complete(retry).text
    return raw


def answer_questions(
    qas: list[QAPair],
    context: Summary | MediaRef,
    model: Backend,
    decode: DecodeParams = DecodeParams(),
    max_concurrency: int = 4,
) -> list[tuple[str, str]]:
    """Pose every question against the context; order follows the input.

    A failed model call degrades to raw text "" for that item (graded
    later as a parse failure) instead of aborting the batch.
    """

    def ask(qa: QAPair) -> tuple[str, str]:
        return (qa.id, ask_one(model, qa, context, decode))

    results = parallel_map(ask, qas, max_workers=max_concurrency)
    out: list[tuple[str, str]] = []
    for qa, result in zip(qas, results):
        if isinstance(result, Exception):
            log.warning("answering %s failed: %s", qa.id, result)
            out.append((qa.id, ""))
        else:
            out.append(result)
    return out


# --- grading ----------------------------------------------------------------


def normalize_answer(text: str) -> str:
    """Trim, casefold, and strip punctuation to bare word tokens."""
    cleaned = re.sub(r"[^\w\s]", " ", text.casefold())
    return " ".join(cleaned.split())


def parse_verdict(raw_text: str) -> str | None:
    tokens = normalize_answer(raw_text).split()
    if tokens and tokens[0] in ("supported", "unsupported"):
        return tokens[0].upper()
    return None


def grade_answer(qa: QAPair, raw_text: str) -> GradedAnswer:
    """Deterministic total grading; never raises on model text."""
    fmt = qa.format
    if isinstance(fmt, MultipleChoice):
        return _grade_mc(qa, fmt, raw_text)
    if isinstance(fmt, YesNo):
        return _grade_yesno(qa, fmt, raw_text)
    if isinstance(fmt, SortTask):
        return _grade_sort(qa, fmt, raw_text)
    if isinstance(fmt, ClaimCheck):
        return _grade_claim(qa, raw_text)
    raise SchemaError(f"unsupported question format {type(fmt).__name__}")


def _parse_failure(qa: QAPair, raw_text: str) -> GradedAnswer:
    return GradedAnswer(qa.id, raw_text, None, False, GradeRule.PARSE_FAILURE)


def _grade_mc(qa: QAPair, fmt: MultipleChoice, raw_text: str) -> GradedAnswer:
    norm = normalize_answer(raw_text)
    tokens = norm.split()
    letters = [chr(ord("a") + i) for i in range(len(fmt.choices))]
    index = None
    if tokens and tokens[0] in letters:
        index = letters.index(tokens[0])
    else:
        for i, choice in enumerate(fmt.choices):
            if norm == normalize_answer(choice):
                index = i
                break
    if index is None:
        return _parse_failure(qa, raw_text)
    return GradedAnswer(
        qa.id,
        raw_text,
        letters[index].upper(),
        index == fmt.gold_index,
        GradeRule.INDEX_MATCH,
    )


def _grade_yesno(qa: QAPair, fmt: YesNo, raw_text: str) -> GradedAnswer:
    tokens = normalize_answer(raw_text).split()
    if not tokens or tokens[0] not in ("yes", "no"):
        return _parse_failure(qa, raw_text)
    answer = tokens[0] == "yes"
    return GradedAnswer(
        qa.id, raw_text, tokens[0], answer == fmt.gold, GradeRule.YES_NO_MATCH
    )


def _grade_sort(qa: QAPair, fmt: SortTask, raw_text: str) -> GradedAnswer:
    values = [int(m) for m in _INT_RE.findall(raw_text)]
    if sorted(values) != list(range(len(fmt.events))):
        return _parse_failure(qa, raw_text)
    return GradedAnswer(
        qa.id,
        raw_text,
        ",".join(str(v) for v in values),
        values == list(fmt.gold_order),
        GradeRule.EXACT_PERMUTATION,
    )


def _grade_claim(qa: QAPair, raw_text: str) -> GradedAnswer:
    verdict = parse_verdict(raw_text)
    if verdict is None:
        return _parse_failure(qa, raw_text)
    return GradedAnswer(
        qa.id, raw_text, verdict, verdict == "SUPPORTED", GradeRule.SUPPORT_VERDICT
    )


# --- aggregation ------------------------------------------------------------


def score_dimension(graded: list[GradedAnswer], dim: Dimension) -> DimensionScore:
    """Exact proportion correct. Caller guarantees all answers are of dim."""
    if not graded:
        raise EmptyDimension(f"no graded answers for dimension {dim.value}")
    correct = sum(1 for g in graded if g.correct)
    return DimensionScore(dimension=dim, correct=correct, total=len(graded))


def qeva_score(
    summary_id: str,
    coverage: DimensionScore,
    factuality: DimensionScore,
    chronology: DimensionScore,
) -> QevaScore:
    """Arithmetic mean of the three component proportions."""
    components = {
        Dimension.COVERAGE: coverage,
        Dimension.FACTUALITY: factuality,
        Dimension.CHRONOLOGY: chronology,
    }
    for dim, score in components.items():
        if score.dimension is not dim:
            raise SchemaError(
                f"component for {dim.value} carries dimension {score.dimension.value}"
            )
    return QevaScore(summary_id=summary_id, components=components)
