"""Chronology questions sampled from an event timeline.

Entirely model-free: given the extracted timeline and a seed this is a
pure function, so gold answers can be property-tested against the
timeline by brute force. Three question types are emitted in as close
to equal thirds as n allows, remainder going to order verification,
then precedence, then sorting.
"""

from __future__ import annotations

import math
import random
import re

from ..core import Dimension, MultipleChoice, Origin, QAPair, SortTask, YesNo
from ..errors import ValidationError
from .generate import EventTimeline

ORDER_QUESTION = 'In the video, does "{first}" happen before "{second}"?'
PRECEDENCE_QUESTION = "Which of these happens first in the video?"
SORT_QUESTION = "Arrange the listed events in the order they occur in the video."

_ORDER_RE = re.compile(r'does "(.+)" happen before "(.+)"\?')

SORT_SAMPLE_SIZE = 4


def split_counts(n: int) -> tuple[int, int, int]:
    """(order-verification, precedence, sort) counts for n questions."""
    base, rem = divmod(n, 3)
    return base + (1 if rem >= 1 else 0), base + (1 if rem >= 2 else 0), base


def parse_order_question(question: str) -> tuple[str, str] | None:
    """Recover the two event descriptions from an order-verification question."""
    match = _ORDER_RE.search(question)
    return (match.group(1), match.group(2)) if match else None


def sample_event_pairs(
    rng: random.Random, n_events: int, count: int
) -> list[tuple[int, int]]:
    """`count` index pairs (i < j), at least half non-adjacent when possible.

    Distinct pairs are preferred; pools recycle once exhausted, so small
    timelines with many questions repeat pairs rather than fail.
    """
    if n_events < 2:
        raise ValidationError("pair sampling needs >= 2 events")
    non_adjacent = [
        (i, j) for i in range(n_events) for j in range(i + 2, n_events)
    ]
    all_pairs = [(i, j) for i in range(n_events) for j in range(i + 1, n_events)]
    need_non_adjacent = math.ceil(count / 2) if non_adjacent else 0

    picked = _cycle_sample(rng, non_adjacent, need_non_adjacent)
    picked += _cycle_sample(rng, all_pairs, count - need_non_adjacent)
    rng.shuffle(picked)
    return picked


def _cycle_sample(rng: random.Random, pool: list, count: int) -> list:
    out: list = []
    while len(out) < count:
        batch = list(pool)
        rng.shuffle(batch)
        out.extend(batch[: count - len(out)])
    return out


def generate_chronology_qa(
    timeline: EventTimeline, n: int, rng_seed: int
) -> list[QAPair]:
    """Deterministic chronology QA set for one timeline."""
    if len(timeline) < 2:
        raise ValidationError("chronology generation needs >= 2 timeline events")
    if n < 3:
        raise ValidationError(f"chronology generation needs n >= 3, got {n}")

    rng = random.Random(rng_seed)
    n_order, n_precedence, n_sort = split_counts(n)
    descriptions = [e.description for e in timeline.events]
    pairs = sample_event_pairs(rng, len(timeline), n_order + n_precedence)

    questions: list[QAPair] = []

    def qa(question: str, fmt) -> QAPair:
        return QAPair(
            id=f"{timeline.video_id}-chr-{len(questions):03d}",
            dimension=Dimension.CHRONOLOGY,
            question=question,
            format=fmt,
            origin=Origin.FROM_VIDEO,
        )

    for i, j in pairs[:n_order]:
        first, second = (i, j) if rng.random() >= 0.5 else (j, i)
        questions.append(
            qa(
                ORDER_QUESTION.format(
                    first=descriptions[first], second=descriptions[second]
                ),
                YesNo(gold=first < second),
            )
        )

    for i, j in pairs[n_order:]:
        shown = [i, j] if rng.random() < 0.5 else [j, i]
        questions.append(
            qa(
                PRECEDENCE_QUESTION,
                MultipleChoice(
                    choices=tuple(descriptions[k] for k in shown),
                    gold_index=shown.index(min(shown)),
                ),
            )
        )

    k = min(SORT_SAMPLE_SIZE, len(timeline))
    for _ in range(n_sort):
        chosen = sorted(rng.sample(range(len(timeline)), k))
        shown = list(chosen)
        rng.shuffle(shown)
        gold_order = tuple(sorted(range(k), key=lambda pos: shown[pos]))
        questions.append(
            qa(
                SORT_QUESTION,
                SortTask(
                    events=tuple(descriptions[idx] for idx in shown),
                    gold_order=gold_order,
                ),
            )
        )
    return questions
