"""Model-invocation interface shared by all backends.

A backend is anything with a stable ``backend_id``, a video-capability
flag, and a ``complete(request)`` method. Requests are content-hashed
(prompts, media id, decode parameters) so recorded fixtures replay
across processes and platforms.
"""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..core import MediaRef
from ..errors import CapabilityError, SchemaError


@dataclass(frozen=True)
class DecodeParams:
    temperature: float = 0.0
    max_tokens: int = 1024
    seed: int | None = None

    def __post_init__(self):
        if self.temperature < 0:
            raise SchemaError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_tokens <= 0:
            raise SchemaError(f"max_tokens must be > 0, got {self.max_tokens}")

    def to_dict(self) -> dict:
        return {
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ModelRequest:
    """Ordered (role, text) prompts plus optional media attachment."""

    role_prompts: tuple[tuple[str, str], ...]
    media: MediaRef | None = None
    decode: DecodeParams = field(default_factory=DecodeParams)

    def __post_init__(self):
        object.__setattr__(
            self, "role_prompts", tuple((r, t) for r, t in self.role_prompts)
        )
        for role, _ in self.role_prompts:
            if role not in ("system", "user"):
                raise SchemaError(f"unknown prompt role {role!r}")
        if not any(role == "user" for role, _ in self.role_prompts):
            raise SchemaError("request needs at least one user prompt")

    @property
    def user_text(self) -> str:
        return "\n".join(t for r, t in self.role_prompts if r == "user")

    def content_hash(self) -> str:
        """Stable across processes: prompts, media id and decode only."""
        payload = {
            "role_prompts": [list(p) for p in self.role_prompts],
            "media": self.media.id if self.media else None,
            "decode": self.decode.to_dict(),
        }
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ModelResponse:
    text: str
    backend_id: str
    latency_ms: int = 0
    cached: bool = False

    def __post_init__(self):
        if self.latency_ms < 0:
            raise SchemaError("latency_ms must be >= 0")

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "backend_id": self.backend_id,
            "latency_ms": self.latency_ms,
            "cached": self.cached,
        }


class Backend(ABC):
    """One model endpoint. Implementations must be thread-safe."""

    backend_id: str
    supports_video: bool

    @abstractmethod
    def complete(self, request: ModelRequest) -> ModelResponse:
        """Return the completion for ``request``."""

    def _check_capability(self, request: ModelRequest) -> None:
        if request.media is not None and not self.supports_video:
            raise CapabilityError(
                f"backend {self.backend_id!r} is text-only but the request "
                f"attaches media {request.media.id!r}"
            )


def complete(backend: Backend, request: ModelRequest) -> ModelResponse:
    """Free-function form of Backend.complete."""
    return backend.complete(request)


def parallel_map(fn, items, max_workers: int = 4) -> list:
    """Apply fn to items concurrently, preserving input order.

    Exceptions are returned in place of results (callers decide per-item
    handling); this keeps one failed model call from killing a batch.
    """
    items = list(items)
    if not items:
        return []
    if max_workers <= 1 or len(items) == 1:
        return [_call_guard(fn, item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda item: _call_guard(fn, item), items))


def _call_guard(fn, item):
    try:
        return fn(item)
    except Exception as exc:  # noqa: BLE001 - caller inspects per item
        return exc
