"""Parsing of model completions into validated items.

The generation prompts demand a strict JSON array. We tolerate one
cosmetic wrapper (a markdown code fence) because chat models add it
routinely; anything else is a parse failure. Malformed items inside a
well-formed array are dropped, never repaired.
"""

from __future__ import annotations

import json


def strip_code_fence(text: str) -> str:
    text = text.strip()
    if text.startswith("```"):
        lines = text.splitlines()
        if len(lines) >= 2 and lines[-1].strip().startswith("```"):
            return "\n".join(lines[1:-1]).strip()
    return text


def parse_json_array(text: str) -> list | None:
    """The completion as a JSON list, or None when it is not one."""
    try:
        value = json.loads(strip_code_fence(text))
    except json.JSONDecodeError:
        return None
    return value if isinstance(value, list) else None


def parse_items(text: str, validate) -> list | None:
    """Apply ``validate`` to each array item, dropping the malformed.

    Returns None when the completion is not a JSON array at all (the
    caller may reprompt once); otherwise the list of validated items,
    possibly empty.
    """
    array = parse_json_array(text)
    if array is None:
        return None
    items = []
    for raw in array:
        item = validate(raw)
        if item is not None:
            items.append(item)
    return items
