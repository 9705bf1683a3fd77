"""Path setup and shared dataset fixtures."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import STORYBOARDS, annotate, write_dataset, write_storyboards  # noqa: E402

REPO_ROOT = Path(__file__).resolve().parent.parent
MINI_DATASET = REPO_ROOT / "fixtures" / "mini"
RECORDINGS = REPO_ROOT / "fixtures" / "recordings"


@pytest.fixture()
def tiny_dataset(tmp_path) -> Path:
    """One video, two candidate systems, full annotations."""
    frames = write_storyboards(tmp_path / "frames", {"v1": STORYBOARDS["v1"]})
    videos = [{"id": "v1", "frame_dir": str(frames["v1"])}]
    references = [
        {
            "id": "r1",
            "video_id": "v1",
            "system": "human",
            "text": " ".join(STORYBOARDS["v1"][:4]),
        }
    ]
    candidates = [
        {
            "id": "s1",
            "video_id": "v1",
            "system": "sys-a",
            "text": (
                "A hiker leaves the trailhead at dawn. "
                "The hiker crosses a wooden bridge. "
                "Rain starts falling on the trail."
            ),
        },
        {
            "id": "s2",
            "video_id": "v1",
            "system": "sys-b",
            "text": "The hiker crosses a wooden bridge before anything else happens.",
        },
    ]
    annotations = annotate(
        "s1",
        {"coverage": (4, 5), "factuality": (5, 5), "chronology": (4, 4)},
    ) + annotate(
        "s2",
        {"coverage": (2, 2), "factuality": (3, 2), "chronology": (2, 3)},
    )
    return write_dataset(tmp_path / "ds", videos, references, candidates, annotations)
