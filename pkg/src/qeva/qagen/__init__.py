"""Dimension-specific question generation."""

from .chronology import generate_chronology_qa
from .generate import (
    ElementCategory,
    EventTimeline,
    SalientElement,
    TimelineEvent,
    extract_event_timeline,
    extract_salient_elements,
    generate_coverage_qa,
    generate_factuality_qa,
)

__all__ = [
    "ElementCategory",
    "EventTimeline",
    "SalientElement",
    "TimelineEvent",
    "extract_event_timeline",
    "extract_salient_elements",
    "generate_chronology_qa",
    "generate_coverage_qa",
    "generate_factuality_qa",
]
