"""OpenAI-compatible chat-completions client.

Media handling: a frame-directory video is sent as one image content
part per frame file (lexicographic filename order, data URLs); a URI
video is sent as a single image_url part pointing at the URI. Frame
sampling itself is the model provider's concern.

Transient failures (429, 5xx, connection errors) are retried with
exponential backoff, base 1 s and factor 2. 401/403 raise AuthError
without retrying. The API key is read from the environment variable
named in the config, never from the config itself, so secrets cannot
leak into persisted run manifests.
"""

from __future__ import annotations

import base64
import os
import threading
import time
from pathlib import Path

import requests

from ..core import MediaRef
from ..errors import AuthError, ProtocolError, TransportError
from .base import Backend, ModelRequest, ModelResponse

_IMAGE_MIME = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".gif": "image/gif",
    ".webp": "image/webp",
    ".bmp": "image/bmp",
}

_RETRY_BASE_S = 1.0
_RETRY_FACTOR = 2.0


class HttpBackend(Backend):
    def __init__(
        self,
        base_url: str,
        model_name: str,
        api_key_env: str | None = None,
        backend_id: str | None = None,
        supports_video: bool = False,
        timeout_s: float = 120.0,
        max_retries: int = 3,
        max_concurrency: int = 4,
        session: requests.Session | None = None,
        sleep=time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_name = model_name
        self.backend_id = backend_id or model_name
        self.supports_video = supports_video
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self._semaphore = threading.BoundedSemaphore(max_concurrency)
        self._session = session or requests.Session()
        self._sleep = sleep
        self._api_key = None
        if api_key_env is not None:
            self._api_key = os.environ.get(api_key_env)
            if not self._api_key:
                raise AuthError(
                    f"environment variable {api_key_env!r} is not set; it must "
                    f"hold the API key for {self.backend_id!r}"
                )

    def complete(self, request: ModelRequest) -> ModelResponse:
        self._check_capability(request)
        body = {
            "model": self.model_name,
            "messages": _messages(request),
            "temperature": request.decode.temperature,
            "max_tokens": request.decode.max_tokens,
        }
        if request.decode.seed is not None:
            body["seed"] = request.decode.seed
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"

        start = time.monotonic()
        payload = self._post_with_retry(body, headers)
        latency_ms = int((time.monotonic() - start) * 1000)
        return ModelResponse(
            text=_extract_text(payload),
            backend_id=self.backend_id,
            latency_ms=latency_ms,
        )

    def _post_with_retry(self, body: dict, headers: dict) -> dict:
        url = f"{self.base_url}/chat/completions"
        last_reason = "no attempt made"
        for attempt in range(self.max_retries + 1):
            if attempt > 0:
                self._sleep(_RETRY_BASE_S * _RETRY_FACTOR ** (attempt - 1))
            try:
                with self._semaphore:
                    resp = self._session.post(
                        url, json=body, headers=headers, timeout=self.timeout_s
                    )
            except requests.RequestException as exc:
                last_reason = f"connection failure: {exc}"
                continue
            if resp.status_code in (401, 403):
                raise AuthError(
                    f"{url} returned {resp.status_code}; check the API key"
                )
            if resp.status_code == 429 or resp.status_code >= 500:
                last_reason = f"status {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise TransportError(
                    f"{url} returned {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"{url} returned non-JSON body: {exc}") from exc
        raise TransportError(
            f"{url} failed after {self.max_retries} retries ({last_reason})"
        )


def _messages(request: ModelRequest) -> list[dict]:
    messages = [
        {"role": role, "content": text} for role, text in request.role_prompts
    ]
    if request.media is None:
        return messages
    parts = None
    for message in messages:
        if message["role"] == "user":
            parts = [{"type": "text", "text": message["content"]}]
            parts.extend(_media_parts(request.media))
            message["content"] = parts
            break
    return messages


def _media_parts(media: MediaRef) -> list[dict]:
    if media.uri:
        return [{"type": "image_url", "image_url": {"url": media.uri}}]
    root = Path(media.frame_dir)
    if not root.is_dir():
        raise TransportError(f"frame directory {root} does not exist")
    parts = []
    for path in sorted(root.iterdir()):
        mime = _IMAGE_MIME.get(path.suffix.lower())
        if mime is None:
            continue
        encoded = base64.b64encode(path.read_bytes()).decode("ascii")
        parts.append(
            {
                "type": "image_url",
                "image_url": {"url": f"data:{mime};base64,{encoded}"},
            }
        )
    if not parts:
        raise TransportError(f"frame directory {root} holds no image files")
    return parts


def _extract_text(payload: dict) -> str:
    try:
        choices = payload["choices"]
        message = choices[0]["message"]
        content = message["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"response body missing choices[0].message.content: {exc}")
    if content is None:
        return ""
    if not isinstance(content, str):
        raise ProtocolError(f"message content is {type(content).__name__}, not text")
    return content
