"""Record/replay store for model calls.

Every request has a content hash over its prompts, media id, and decode
parameters (but not over which backend served it). A recording run saves
one JSON file per hash; a replay run answers only from those files, so
pipelines re-execute byte-identically with zero network traffic. The
request is stored alongside the response for auditability.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..core import canonical_dumps
from ..errors import FixtureMiss, SchemaError
from .base import Backend, ModelRequest, ModelResponse


class FixtureStore:
    """Directory of ``<content-hash>.json`` request/response records."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path(self, content_hash: str) -> Path:
        return self.root / f"{content_hash}.json"

    def get(self, content_hash: str) -> dict | None:
        path = self.path(content_hash)
        if not path.is_file():
            return None
        try:
            return json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"corrupt fixture {path}: {exc}") from exc

    def put(self, content_hash: str, record: dict) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.path(content_hash)
        path.write_text(canonical_dumps(record) + "\n", "utf-8")
        return path

    def __len__(self) -> int:
        if not self.root.is_dir():
            return 0
        return sum(1 for _ in self.root.glob("*.json"))


def record_fixture(
    store: FixtureStore, request: ModelRequest, response: ModelResponse
) -> Path:
    """Persist one exchange; re-recording the same request overwrites."""
    record = {
        "hash": request.content_hash(),
        "request": {
            "role_prompts": [list(p) for p in request.role_prompts],
            "media": request.media.to_dict() if request.media else None,
            "decode": request.decode.to_dict(),
        },
        "response": {
            "text": response.text,
            "backend_id": response.backend_id,
        },
    }
    return store.put(record["hash"], record)


class FixtureBackend(Backend):
    """Replays recorded responses; any unrecorded request is an error."""

    def __init__(
        self,
        store: FixtureStore | str | Path,
        backend_id: str = "fixture",
        supports_video: bool = True,
    ):
        self.store = store if isinstance(store, FixtureStore) else FixtureStore(store)
        self.backend_id = backend_id
        self.supports_video = supports_video

    def complete(self, request: ModelRequest) -> ModelResponse:
        self._check_capability(request)
        content_hash = request.content_hash()
        record = self.store.get(content_hash)
        if record is None:
            head = request.user_text.splitlines()[0][:80]
            raise FixtureMiss(
                f"no recorded response for request {content_hash[:12]} "
                f"({head!r}) in {self.store.root}"
            )
        return ModelResponse(
            text=record["response"]["text"],
            backend_id=self.backend_id,
            latency_ms=0,
            cached=True,
        )


class RecordingBackend(Backend):
    """Delegates to an inner backend and saves each exchange as a fixture."""

    def __init__(self, inner: Backend, store: FixtureStore | str | Path):
        self.inner = inner
        self.store = store if isinstance(store, FixtureStore) else FixtureStore(store)

    @property
    def backend_id(self) -> str:
        return self.inner.backend_id

    @property
    def supports_video(self) -> bool:
        return self.inner.supports_video

    def complete(self, request: ModelRequest) -> ModelResponse:
        response = self.inner.complete(request)
        record_fixture(self.store, request, response)
        return response
