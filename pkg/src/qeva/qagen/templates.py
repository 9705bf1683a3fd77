"""Versioned prompt templates with {{NAME}} placeholders.

Templates live as text assets next to this module; the version suffix in
the filename is recorded in run manifests so scores can be traced back to
the exact prompt wording that produced them. The leading "### Task:" line
labels each request for humans reading transcripts and lets the offline
mock backend recognize what is being asked of it.
"""

from __future__ import annotations

import re
from importlib import resources

from ..errors import ConfigError

TEMPLATE_VERSIONS = {
    "coverage_generate": "v1",
    "salient_extract": "v1",
    "factuality_claims": "v1",
    "timeline_extract": "v1",
    "answer_mc": "v1",
    "answer_yesno": "v1",
    "answer_sort": "v1",
    "answer_claim": "v1",
}

_PLACEHOLDER = re.compile(r"\{\{([A-Z_]+)\}\}")

CONTEXT_NONE = (
    "No context is provided. Answer from the question alone, using your "
    "general knowledge."
)
CONTEXT_VIDEO = (
    "Use only the attached video to answer. Ignore anything you believe "
    "you know from elsewhere."
)
CONTEXT_SUMMARY_HEADER = (
    "Use only the summary below to answer. Ignore anything you believe "
    "you know from elsewhere.\n\nSummary:\n"
)


def template_versions() -> dict[str, str]:
    """Copy of the registry, for run manifests."""
    return dict(TEMPLATE_VERSIONS)


def load_template(name: str) -> str:
    if name not in TEMPLATE_VERSIONS:
        raise ConfigError(f"unknown template {name!r}")
    filename = f"{name}_{TEMPLATE_VERSIONS[name]}.txt"
    return (
        resources.files("qeva.qagen")
        .joinpath("templates", filename)
        .read_text("utf-8")
    )


def render(name: str, **values: str) -> str:
    """Fill every placeholder; unresolved or unknown names are errors."""
    text = load_template(name)
    needed = set(_PLACEHOLDER.findall(text))
    given = set(values)
    if needed != given:
        raise ConfigError(
            f"template {name!r} placeholders {sorted(needed)} != given {sorted(given)}"
        )
    for key, value in values.items():
        text = text.replace("{{" + key + "}}", str(value))
    return text


def summary_context(summary_text: str) -> str:
    return CONTEXT_SUMMARY_HEADER + summary_text


def task_of(prompt_text: str) -> str | None:
    """Task label from the leading marker line, if present."""
    first = prompt_text.lstrip().splitlines()[0] if prompt_text.strip() else ""
    if first.startswith("### Task:"):
        return first.removeprefix("### Task:").strip()
    return None
