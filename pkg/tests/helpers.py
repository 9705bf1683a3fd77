"""Shared fixtures-in-code: scripted backends and dataset builders."""

from __future__ import annotations

import json
import threading
from pathlib import Path

from qeva.backends.base import Backend, ModelRequest, ModelResponse
from qeva.core import write_jsonl


class ScriptedBackend(Backend):
    """Replays a fixed list of completions, recording every request.

    An Exception instance in the script is raised instead of returned,
    so per-item failure handling can be exercised deterministically.
    """

    def __init__(self, script, backend_id="scripted", supports_video=True):
        self.backend_id = backend_id
        self.supports_video = supports_video
        self._script = list(script)
        self._lock = threading.Lock()
        self.requests: list[ModelRequest] = []

    def complete(self, request: ModelRequest) -> ModelResponse:
        self._check_capability(request)
        with self._lock:
            self.requests.append(request)
            if not self._script:
                raise AssertionError(
                    f"scripted backend {self.backend_id!r} ran out of responses"
                )
            item = self._script.pop(0)
        if isinstance(item, Exception):
            raise item
        return ModelResponse(text=item, backend_id=self.backend_id)

    @property
    def calls(self) -> int:
        return len(self.requests)


class AnswerBackend(Backend):
    """Computes each completion from the request via a callable."""

    def __init__(self, fn, backend_id="answer-fn", supports_video=True):
        self.backend_id = backend_id
        self.supports_video = supports_video
        self._fn = fn
        self._lock = threading.Lock()
        self.requests: list[ModelRequest] = []

    def complete(self, request: ModelRequest) -> ModelResponse:
        self._check_capability(request)
        with self._lock:
            self.requests.append(request)
        return ModelResponse(text=self._fn(request), backend_id=self.backend_id)

    @property
    def calls(self) -> int:
        return len(self.requests)


class CountingBackend(Backend):
    """Delegates to another backend, counting completions."""

    def __init__(self, inner: Backend):
        self.inner = inner
        self.calls = 0
        self._lock = threading.Lock()

    @property
    def backend_id(self) -> str:
        return self.inner.backend_id

    @property
    def supports_video(self) -> bool:
        return self.inner.supports_video

    def complete(self, request: ModelRequest) -> ModelResponse:
        with self._lock:
            self.calls += 1
        return self.inner.complete(request)


STORYBOARDS = {
    "v1": [
        "a hiker leaves the trailhead at dawn",
        "the hiker crosses a wooden bridge",
        "clouds gather over the ridge",
        "rain starts falling on the trail",
        "the hiker shelters under a granite overhang",
        "a rainbow appears above the valley",
    ],
    "v2": [
        "a baker preheats the brick oven",
        "the baker kneads sourdough on the bench",
        "loaves rise in cloth-lined baskets",
        "the baker scores each loaf with a blade",
        "golden bread comes out of the oven",
    ],
    "v3": [
        "mechanics roll a red car into the workshop",
        "the old engine is lifted out with a crane",
        "a new engine is bolted into place",
        "the hood closes over the finished engine",
        "the red car drives out onto the street",
    ],
}


def write_storyboards(frames_root: Path, boards=None) -> dict[str, Path]:
    """One frame-dir stub per video: NNN.txt files, one event per file."""
    dirs = {}
    for vid, lines in (boards or STORYBOARDS).items():
        d = frames_root / vid
        d.mkdir(parents=True, exist_ok=True)
        for i, line in enumerate(lines):
            (d / f"{i:03d}.txt").write_text(line + "\n", encoding="utf-8")
        dirs[vid] = d
    return dirs


def write_dataset(
    root: Path,
    videos: list[dict],
    references: list[dict],
    candidates: list[dict],
    annotations: list[dict],
) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    write_jsonl(root / "videos.jsonl", videos)
    write_jsonl(root / "references.jsonl", references)
    write_jsonl(root / "candidates.jsonl", candidates)
    write_jsonl(root / "annotations.jsonl", annotations)
    return root


def annotate(summary_id: str, scores: dict[str, tuple[int, int]]) -> list[dict]:
    """Two annotator records per criterion from {criterion: (a1, a2)}."""
    out = []
    for criterion, (first, second) in scores.items():
        out.append(
            {
                "annotator_id": "a1",
                "summary_id": summary_id,
                "criterion": criterion,
                "score": first,
            }
        )
        out.append(
            {
                "annotator_id": "a2",
                "summary_id": summary_id,
                "criterion": criterion,
                "score": second,
            }
        )
    return out


def json_array(items) -> str:
    """A strict JSON array completion, as generation prompts demand."""
    return json.dumps(items)


def hash_answerer(request: ModelRequest) -> str:
    """Deterministic pseudo-random answer derived from the request text.

    Gives filter pipelines a model that is a pure function of the posed
    request: right on some questions, wrong on others, stable across runs.
    """
    import hashlib
    import re as _re

    from qeva.qagen.templates import task_of

    text = request.user_text
    pick = int.from_bytes(
        hashlib.sha256(text.encode("utf-8")).digest()[:4], "big"
    )
    task = task_of(text)
    if task == "answer-multiple-choice":
        n = len(_re.findall(r"^\([A-Z]\)", text, flags=_re.M))
        return chr(ord("A") + pick % max(n, 2))
    if task == "answer-yes-no":
        return "yes" if pick % 2 else "no"
    if task == "answer-sort":
        n = len(_re.findall(r"^\d+:", text, flags=_re.M))
        order = list(range(n))
        rnd = pick
        for i in range(n - 1, 0, -1):  # Fisher-Yates driven by the hash
            rnd = (rnd * 6364136223846793005 + 1442695040888963407) % 2**64
            j = rnd % (i + 1)
            order[i], order[j] = order[j], order[i]
        return ",".join(str(v) for v in order)
    if task == "answer-claim-check":
        return "SUPPORTED" if pick % 3 else "UNSUPPORTED"
    return "unrecognized task"


def random_qa_set(rng, video_id: str = "v1", summary_id: str = "s1") -> list:
    """A mixed-format QA batch with random golds, sized 0..14."""
    from qeva.core import (
        ClaimCheck,
        Dimension,
        MultipleChoice,
        Origin,
        QAPair,
        SortTask,
        YesNo,
    )

    qas = []
    for i in range(rng.randrange(0, 15)):
        kind = rng.choice(["mc", "yesno", "sort", "claim"])
        if kind == "mc":
            qas.append(
                QAPair(
                    id=f"{video_id}-cov-{i:03d}",
                    dimension=Dimension.COVERAGE,
                    question=f"What happens at point {i}?",
                    format=MultipleChoice(
                        tuple(f"outcome {i}{c}" for c in "abcd"), rng.randrange(4)
                    ),
                    origin=Origin.FROM_VIDEO,
                )
            )
        elif kind == "yesno":
            qas.append(
                QAPair(
                    id=f"{video_id}-chr-{i:03d}",
                    dimension=Dimension.CHRONOLOGY,
                    question=f'Does "step {i}" happen before "step {i + 1}"?',
                    format=YesNo(gold=rng.random() < 0.5),
                    origin=Origin.FROM_VIDEO,
                )
            )
        elif kind == "sort":
            n = rng.randrange(2, 5)
            order = list(range(n))
            rng.shuffle(order)
            qas.append(
                QAPair(
                    id=f"{video_id}-chr-{i:03d}",
                    dimension=Dimension.CHRONOLOGY,
                    question="Sort these events chronologically.",
                    format=SortTask(
                        tuple(f"scene {i}.{k}" for k in range(n)), tuple(order)
                    ),
                    origin=Origin.FROM_VIDEO,
                )
            )
        else:
            qas.append(
                QAPair(
                    id=f"{summary_id}-fact-{i:03d}",
                    dimension=Dimension.FACTUALITY,
                    question="Is this claim supported by the video?",
                    format=ClaimCheck(f"Claim number {i} about the video."),
                    origin=Origin.FROM_SUMMARY,
                )
            )
    return qas


def coverage_items(count: int, gold: int = 0) -> list[dict]:
    return [
        {
            "question": f"What happens in scene {i}?",
            "choices": [f"event {i}{letter}" for letter in "abcd"],
            "answer_index": gold,
        }
        for i in range(count)
    ]
