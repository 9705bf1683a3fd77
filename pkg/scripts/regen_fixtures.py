#!/usr/bin/env python3
"""Rebuild fixtures/mini and re-record fixtures/recordings.

The mini corpus is three storyboard videos, two systems ("verbatim"
summarizes every event in order; "partial" covers a couple of events,
sometimes out of order), six candidate summaries, and two annotators per
criterion. Recordings capture every model call the offline mock makes
during a seed-7 evaluation, so the full pipeline replays byte-for-byte
with no backend at all.

Run from anywhere; paths inside the fixture stay relative to it.
"""

from __future__ import annotations

import os
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))
sys.path.insert(0, str(REPO_ROOT / "tests"))

from helpers import STORYBOARDS, annotate, write_dataset, write_storyboards  # noqa: E402
from qeva.cli import main  # noqa: E402
from qeva.harness import load_metric_run  # noqa: E402

MINI = REPO_ROOT / "fixtures" / "mini"
RECORDINGS = REPO_ROOT / "fixtures" / "recordings"
SEED = 7


def sentence(line: str) -> str:
    return line[0].upper() + line[1:] + "."


def build_mini() -> None:
    if MINI.exists():
        shutil.rmtree(MINI)
    write_storyboards(MINI / "frames", STORYBOARDS)

    videos = [
        {"id": vid, "frame_dir": f"frames/{vid}"} for vid in sorted(STORYBOARDS)
    ]
    references = [
        {
            "id": f"r-{vid}",
            "video_id": vid,
            "system": "human",
            "text": " ".join(sentence(line) for line in lines),
        }
        for vid, lines in sorted(STORYBOARDS.items())
    ]

    def candidate(sid: str, vid: str, system: str, event_indices) -> dict:
        text = " ".join(sentence(STORYBOARDS[vid][i]) for i in event_indices)
        return {"id": sid, "video_id": vid, "system": system, "text": text}

    candidates = [
        candidate("s1", "v1", "verbatim", range(6)),
        candidate("s2", "v1", "partial", [3, 1]),  # two events, wrong order
        candidate("s3", "v2", "verbatim", range(5)),
        candidate("s4", "v2", "partial", [0, 2]),
        candidate("s5", "v3", "verbatim", range(5)),
        candidate("s6", "v3", "partial", [4, 0]),  # wrong order
    ]

    annotations = (
        annotate("s1", {"coverage": (5, 5), "factuality": (5, 4), "chronology": (5, 5)})
        + annotate("s2", {"coverage": (2, 1), "factuality": (4, 4), "chronology": (1, 2)})
        + annotate("s3", {"coverage": (5, 4), "factuality": (5, 5), "chronology": (4, 5)})
        + annotate("s4", {"coverage": (3, 2), "factuality": (4, 5), "chronology": (3, 3)})
        + annotate("s5", {"coverage": (4, 5), "factuality": (5, 5), "chronology": (5, 4)})
        + annotate("s6", {"coverage": (2, 2), "factuality": (4, 3), "chronology": (1, 1)})
    )
    write_dataset(MINI, videos, references, candidates, annotations)


def record() -> None:
    if RECORDINGS.exists():
        shutil.rmtree(RECORDINGS)
    os.chdir(REPO_ROOT)  # keep recorded frame paths relative to the repo
    with tempfile.TemporaryDirectory() as tmp:
        rc = main(
            [
                "record-fixtures",
                "--dataset", "fixtures/mini",
                "--backend", "mock",
                "--seed", str(SEED),
                "--store", "fixtures/recordings",
                "--out-dir", f"{tmp}/recorded",
            ]
        )
        if rc != 0:
            raise SystemExit(f"recording failed with exit code {rc}")

        rc = main(
            [
                "evaluate",
                "--dataset", "fixtures/mini",
                "--backend", "replay",
                "--fixture-store", "fixtures/recordings",
                "--seed", str(SEED),
                "--out-dir", f"{tmp}/replayed",
            ]
        )
        if rc != 0:
            raise SystemExit(f"replay failed with exit code {rc}")

        recorded = Path(tmp, "recorded/qeva_run.json").read_bytes()
        replayed = Path(tmp, "replayed/qeva_run.json").read_bytes()
        if recorded != replayed:
            raise SystemExit("replayed run differs from the recorded run")

        run = load_metric_run(Path(tmp) / "recorded/qeva_run.json")
        if run.excluded:
            raise SystemExit(f"fixture summaries were excluded: {run.excluded}")
        print(f"scored {len(run.per_summary)} summaries:")
        for sid, value in sorted(run.per_summary.items()):
            print(f"  {sid}: {value:.4f}")
    print(f"recordings: {len(list(RECORDINGS.glob('*.json')))} fixture files")


if __name__ == "__main__":
    build_mini()
    record()
    print("fixtures rebuilt")
