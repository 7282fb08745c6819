"""Resolution of attribute references against a chart."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import AmbiguousReference, UnresolvableReference
from ..taskir.types import (
    AggregateSpec,
    AggregateValue,
    AttributeRef,
    Filter,
    Literal,
    Task,
)
from .model import Attribute, ChartSpec


@dataclass(frozen=True)
class Resolution:
    """What a reference points at: an attribute, or one of its choices."""

    kind: str  # "attribute" | "choice"
    attribute: Attribute
    choice: str | None = None


def _name_candidates(name: str, spec: ChartSpec, use_synonyms: bool) -> list[Resolution]:
    needle = name.casefold().strip()
    found: list[Resolution] = []
    for attr in spec.attributes:
        surface = [attr.name]
        if use_synonyms:
            surface.extend(attr.synonyms)
        if any(s.casefold() == needle for s in surface):
            found.append(Resolution(kind="attribute", attribute=attr))
        for choice in attr.choices:
            if choice.casefold() == needle:
                found.append(Resolution(kind="choice", attribute=attr, choice=choice))
    return found


def _resolve_channel(ref: AttributeRef, spec: ChartSpec) -> Resolution:
    assert ref.channel is not None and ref.channelValue is not None
    binding = spec.binding_for(ref.channel.value, ref.channelValue)
    if binding is None:
        raise UnresolvableReference(
            f"no {ref.channel.value} binding for {ref.channelValue!r} on this chart"
        )
    for attr in spec.attributes:
        if attr.type == "categorical" and binding.choice in attr.choices:
            return Resolution(kind="choice", attribute=attr, choice=binding.choice)
    raise UnresolvableReference(
        f"binding for {ref.channelValue!r} names unknown choice {binding.choice!r}"
    )


def resolve_attribute(
    ref: AttributeRef, spec: ChartSpec, *, use_synonyms: bool = True
) -> Resolution:
    """Resolve a reference to an attribute or a categorical choice.

    Name matching is case-insensitive; synonym matching can be switched
    off for strict scoring.  Raises UnresolvableReference when nothing
    matches and AmbiguousReference when more than one thing does.
    """
    if ref.kind == "byChannel":
        return _resolve_channel(ref, spec)
    if ref.kind == "mixed":
        # The name wins; the channel marker is a presentation cue.
        try:
            return resolve_attribute(
                AttributeRef.by_name(ref.name or ""), spec, use_synonyms=use_synonyms
            )
        except UnresolvableReference:
            return _resolve_channel(ref, spec)
    if not ref.name:
        raise UnresolvableReference("empty reference")
    found = _name_candidates(ref.name, spec, use_synonyms)
    if not found:
        raise UnresolvableReference(f"nothing on this chart is called {ref.name!r}")
    if len(found) > 1:
        kinds = ", ".join(
            f"{r.kind} {r.choice or r.attribute.name!r} of {r.attribute.name!r}"
            if r.kind == "choice"
            else f"attribute {r.attribute.name!r}"
            for r in found
        )
        raise AmbiguousReference(f"{ref.name!r} matches more than one thing: {kinds}")
    return found[0]


def _resolve_ref_operand(ref: AttributeRef, spec: ChartSpec) -> AttributeRef:
    """Rewrite one reference in operand/target position to byName form."""
    if ref.kind == "byName":
        return ref
    if ref.kind == "mixed":
        return AttributeRef.by_name(ref.name or "")
    res = _resolve_channel(ref, spec)
    return AttributeRef.by_name(res.choice or res.attribute.name)


def resolve_channel_refs(task: Task, spec: ChartSpec) -> Task:
    """Rewrite every visual-channel reference to its bound plain name.

    Filters on a bare channel become filters on the bound attribute with
    the bound choice as value; mixed references drop the channel marker.
    The result depends only on names, so two phrasings of the same
    question compare equal after this pass.
    """
    filters = []
    for f in task.filters:
        attr = f.attr
        value = f.value
        if attr.kind == "byChannel":
            res = _resolve_channel(attr, spec)
            attr = AttributeRef.by_name(res.attribute.name)
            value = Literal(res.choice or "")
        elif attr.kind == "mixed":
            attr = AttributeRef.by_name(f.attr.name or "")
        if isinstance(value, AggregateValue):
            value = AggregateValue(
                AggregateSpec(
                    op=value.spec.op,
                    attribute=_resolve_ref_operand(value.spec.attribute, spec),
                )
            )
        filters.append(Filter(attr=attr, op=f.op, value=value, direction=f.direction))
    derive = task.derive
    if derive is not None:
        derive = replace(
            derive,
            operands=tuple(_resolve_ref_operand(o, spec) for o in derive.operands),
        )
    return Task(
        kind=task.kind,
        target=_resolve_ref_operand(task.target, spec) if task.target else None,
        filters=tuple(filters),
        derive=derive,
        subtasks=tuple(resolve_channel_refs(s, spec) for s in task.subtasks),
    )
