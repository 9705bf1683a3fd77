"""Model backends: deterministic mock, fixture record/replay, HTTP."""

from .base import (
    Backend,
    DecodeParams,
    ModelRequest,
    ModelResponse,
    complete,
    parallel_map,
)
from .config import (
    MOCK_IDS,
    ROLES,
    build_backend,
    load_toml,
    mock_suite,
    replay_suite,
    suite_from_config,
    wrap_recording,
)
from .fixtures import FixtureBackend, FixtureStore, RecordingBackend, record_fixture
from .http import HttpBackend
from .mock import MockBackend

__all__ = [
    "Backend",
    "DecodeParams",
    "ModelRequest",
    "ModelResponse",
    "complete",
    "parallel_map",
    "MOCK_IDS",
    "ROLES",
    "build_backend",
    "load_toml",
    "mock_suite",
    "replay_suite",
    "suite_from_config",
    "wrap_recording",
    "FixtureBackend",
    "FixtureStore",
    "RecordingBackend",
    "record_fixture",
    "HttpBackend",
    "MockBackend",
]
