"""Backend construction from TOML config or CLI shorthands.

Four model roles drive a run: "video" generates video-conditioned
questions and checks claims, "text" handles summary-side generation and
answering, and the two filter roles probe questions during filtering.
A config names each role under [backends.<role>]; the filter roles fall
back to one shared [backends.filter] table and finally to the text
backend. Secrets never appear in config values: an http backend names
the environment variable holding its key (api_key_env).
"""

from __future__ import annotations

import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10
    import tomli as tomllib

from ..core import canonical_dumps
from ..errors import ConfigError
from .base import Backend
from .fixtures import FixtureBackend, FixtureStore, RecordingBackend
from .http import HttpBackend
from .mock import MockBackend

ROLES = ("video", "text", "filter_trivial", "filter_quality")

MOCK_IDS = {
    "video": "mock-video",
    "text": "mock-text",
    "filter_trivial": "mock-filter",
    "filter_quality": "mock-filter",
}


def load_toml(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc


def build_backend(table: dict, role: str = "?") -> Backend:
    """One backend from its config table ({kind = ..., ...})."""
    if not isinstance(table, dict):
        raise ConfigError(f"[backends.{role}] must be a table")
    known = dict(table)
    kind = known.pop("kind", None)
    if kind == "mock":
        return MockBackend(
            backend_id=known.pop("id", "mock"),
            supports_video=known.pop("supports_video", True),
            **_none_left(known, role),
        )
    if kind == "fixture":
        store = known.pop("store", None)
        if store is None:
            raise ConfigError(f"[backends.{role}] kind=fixture needs store = <dir>")
        return FixtureBackend(
            store=store,
            backend_id=known.pop("id", "fixture"),
            supports_video=known.pop("supports_video", True),
            **_none_left(known, role),
        )
    if kind == "http":
        for required in ("base_url", "model_name"):
            if required not in known:
                raise ConfigError(f"[backends.{role}] kind=http needs {required}")
        return HttpBackend(
            base_url=known.pop("base_url"),
            model_name=known.pop("model_name"),
            api_key_env=known.pop("api_key_env", None),
            backend_id=known.pop("id", None),
            supports_video=known.pop("supports_video", False),
            timeout_s=known.pop("timeout_s", 120.0),
            max_retries=known.pop("max_retries", 3),
            max_concurrency=known.pop("max_concurrency", 4),
            **_none_left(known, role),
        )
    raise ConfigError(
        f"[backends.{role}] kind must be mock, fixture, or http (got {kind!r})"
    )


def _none_left(leftover: dict, role: str) -> dict:
    if leftover:
        raise ConfigError(
            f"[backends.{role}] has unknown keys: {', '.join(sorted(leftover))}"
        )
    return {}


def suite_from_config(config: dict) -> dict[str, Backend]:
    """Resolve all four roles from a parsed config dict."""
    tables = config.get("backends")
    if not isinstance(tables, dict) or not tables:
        raise ConfigError("config needs a [backends] section with model roles")
    for role in ("video", "text"):
        if role not in tables:
            raise ConfigError(f"config is missing [backends.{role}]")

    built: dict[str, Backend] = {}

    def build_cached(table: dict, role: str) -> Backend:
        key = canonical_dumps(table)
        if key not in built:
            built[key] = build_backend(table, role)
        return built[key]

    suite = {
        "video": build_cached(tables["video"], "video"),
        "text": build_cached(tables["text"], "text"),
    }
    for role in ("filter_trivial", "filter_quality"):
        table = tables.get(role, tables.get("filter"))
        if table is None:
            suite[role] = suite["text"]
        else:
            suite[role] = build_cached(table, role)
    return suite


def mock_suite() -> dict[str, Backend]:
    """Deterministic offline suite; the shared filter id differs from the
    generator ids so the filtering distinctness precondition holds."""
    filter_backend = MockBackend(backend_id=MOCK_IDS["filter_trivial"])
    return {
        "video": MockBackend(backend_id=MOCK_IDS["video"]),
        "text": MockBackend(backend_id=MOCK_IDS["text"]),
        "filter_trivial": filter_backend,
        "filter_quality": filter_backend,
    }


def replay_suite(store: str | Path) -> dict[str, Backend]:
    """Fixture-replay suite that impersonates the mock suite's ids, so
    manifests and config hashes match the recording run exactly."""
    shared = FixtureStore(store)
    filter_backend = FixtureBackend(shared, backend_id=MOCK_IDS["filter_trivial"])
    return {
        "video": FixtureBackend(shared, backend_id=MOCK_IDS["video"]),
        "text": FixtureBackend(shared, backend_id=MOCK_IDS["text"]),
        "filter_trivial": filter_backend,
        "filter_quality": filter_backend,
    }


def wrap_recording(suite: dict[str, Backend], store: str | Path) -> dict[str, Backend]:
    """Record every call from every role into one shared store."""
    shared = FixtureStore(store)
    wrapped: dict[str, Backend] = {}
    seen: dict[int, Backend] = {}
    for role, backend in suite.items():
        if id(backend) not in seen:
            seen[id(backend)] = RecordingBackend(backend, shared)
        wrapped[role] = seen[id(backend)]
    return wrapped
