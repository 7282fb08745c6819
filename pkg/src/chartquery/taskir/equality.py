"""Task equality at two strictness levels."""

from __future__ import annotations

from typing import TYPE_CHECKING

from .grammar import canonicalize, serialize_task
from .types import Task

if TYPE_CHECKING:  # pragma: no cover
    from ..chart.model import ChartSpec


def literally_equal(a: Task, b: Task) -> bool:
    """True when both tasks serialize to the same canonical text."""
    return serialize_task(canonicalize(a)) == serialize_task(canonicalize(b))


def semantically_equal(a: Task, b: Task, spec: "ChartSpec") -> bool:
    """Literal equality after resolving visual-channel references.

    A task that says `color = green` and one that names the bound choice
    outright are the same question about the same chart.  Raises
    UnresolvableReference when a channel reference has no binding.
    """
    # Imported here: the chart model depends on task types, so a
    # top-level import would be circular.
    from ..chart.resolve import resolve_channel_refs

    return literally_equal(resolve_channel_refs(a, spec), resolve_channel_refs(b, spec))
