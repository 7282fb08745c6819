"""Manipulation steps: the shared vocabulary of planner and executor.

Every step is a frozen value object so plans can be compared and
deduplicated structurally.  The phase tag records which part of a task
a step realizes; a well-formed plan keeps phases in declaration order
(filtering first, then derivation, then output emphasis).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar, Union

from ..chart.model import Annotation
from ..taskir.grammar import serialize_derive
from ..taskir.types import DeriveSpec

PHASES = ("filter", "derivation", "output")


@dataclass(frozen=True)
class Highlight:
    """Emphasize rows; with intensity "focus" the rest of the chart dims."""

    kind: ClassVar[str] = "highlight"
    rows: tuple[int, ...]
    intensity: str = "focus"
    phase: str = "filter"


@dataclass(frozen=True)
class Annotate:
    """Attach one text label, optionally with an axis guideline."""

    kind: ClassVar[str] = "annotate"
    annotation: Annotation
    phase: str = "output"


@dataclass(frozen=True)
class Rescale:
    """Retarget axis domains; x is temporal text, y numeric."""

    kind: ClassVar[str] = "rescale"
    x_domain: tuple[str, str] | None = None
    y_domain: tuple[float, float] | None = None
    phase: str = "filter"


@dataclass(frozen=True)
class Rearrange:
    """Reposition marks: align baselines, stack series, or sort by a key."""

    kind: ClassVar[str] = "rearrange"
    mode: str
    key: str | None = None
    ascending: bool = False
    phase: str = "derivation"


@dataclass(frozen=True)
class Reduce:
    """Keep only the listed rows; everything else leaves the chart."""

    kind: ClassVar[str] = "reduce"
    keep_rows: tuple[int, ...]
    phase: str = "filter"


@dataclass(frozen=True)
class Derive:
    """Materialize a computed series under a fresh name."""

    kind: ClassVar[str] = "derive"
    spec: DeriveSpec
    name: str
    phase: str = "derivation"


@dataclass(frozen=True)
class Reencode:
    """Switch the mark type without touching the data."""

    kind: ClassVar[str] = "reencode"
    target_mark: str
    phase: str = "derivation"


ManipStep = Union[Highlight, Annotate, Rescale, Rearrange, Reduce, Derive, Reencode]


def step_to_json(step: ManipStep) -> dict:
    """One step as a JSON document: kind, phase, and camelCase params."""
    params: dict
    if isinstance(step, Highlight):
        params = {"rows": list(step.rows), "intensity": step.intensity}
    elif isinstance(step, Annotate):
        a = step.annotation
        params = {"text": a.text}
        if a.x is not None:
            params["x"] = a.x
        if a.y is not None:
            params["y"] = a.y
        if a.guideline is not None:
            params["guideline"] = a.guideline
    elif isinstance(step, Rescale):
        domain: dict = {}
        if step.x_domain is not None:
            domain["x"] = list(step.x_domain)
        if step.y_domain is not None:
            domain["y"] = list(step.y_domain)
        axis = "xy" if len(domain) == 2 else next(iter(domain), "xy")
        params = {"axis": axis, "domain": domain}
    elif isinstance(step, Rearrange):
        params = {"mode": step.mode}
        if step.mode == "sort":
            params["key"] = step.key
            params["ascending"] = step.ascending
    elif isinstance(step, Reduce):
        params = {"keepRows": list(step.keep_rows)}
    elif isinstance(step, Derive):
        params = {"spec": serialize_derive(step.spec), "name": step.name}
    elif isinstance(step, Reencode):
        params = {"targetMark": step.target_mark}
    else:
        raise TypeError(f"not a manipulation step: {step!r}")
    return {"kind": step.kind, "phase": step.phase, "params": params}


def plan_to_json(steps: list[ManipStep]) -> list[dict]:
    return [step_to_json(s) for s in steps]
