"""Shared types for query translation backends."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..taskir import Task


@dataclass(frozen=True)
class TextSpan:
    """Character range in the original query that produced a task part."""

    start: int
    end: int
    text: str

    @classmethod
    def of(cls, source: str, start: int, end: int) -> "TextSpan":
        return cls(start, end, source[start:end])


@dataclass(frozen=True)
class Translation:
    """A parsed query: the task plus where each part came from.

    Span keys are paths into the canonical task ("target", "filters[0]",
    "derive", "subtasks[1].filters[0]").  Parts without a surface anchor
    (implied targets, duplicated shared filters) carry no span.
    """

    task: Task
    spans: dict[str, TextSpan] = field(default_factory=dict)
    query: str = ""
    backend: str = "rules"
