"""JSON mirror of the task text form, used by the HTTP API and datasets.

Field names: kind, target, filters[{attr, op, value, direction}],
derive, subtasks.  Attribute references are plain strings when by name,
objects carrying channel fields otherwise.  Bracket values follow the
same op-based reading as the text grammar: a two-element array under op
"in" is a closed range, an array under "=" is a membership list.
"""

from __future__ import annotations

from typing import Any

from ..errors import FormatError
from .grammar import canonicalize
from .types import (
    AggregateSpec,
    AggregateValue,
    AttributeRef,
    DeriveSpec,
    Direction,
    Filter,
    FilterOp,
    FilterValue,
    ListValue,
    Literal,
    RangeValue,
    Task,
    TaskKind,
    validate,
)


def _ref_to_json(ref: AttributeRef) -> Any:
    if ref.kind == "byName":
        return ref.name
    if ref.kind == "byChannel":
        return {"channel": ref.channel.value, "value": ref.channelValue}
    return {"name": ref.name, "channel": ref.channel.value, "value": ref.channelValue}


def _ref_from_json(data: Any) -> AttributeRef:
    if isinstance(data, str):
        return AttributeRef.by_name(data)
    if isinstance(data, dict) and "channel" in data:
        try:
            if "name" in data and data["name"] is not None:
                return AttributeRef.mixed(data["name"], data["channel"], data["value"])
            return AttributeRef.by_channel(data["channel"], data["value"])
        except (KeyError, ValueError) as exc:
            raise FormatError(f"bad attribute reference {data!r}") from exc
    raise FormatError(f"bad attribute reference {data!r}")


def _value_to_json(value: FilterValue) -> Any:
    if isinstance(value, Literal):
        return value.text
    if isinstance(value, RangeValue):
        return [value.lo.text, value.hi.text]
    if isinstance(value, ListValue):
        return [item.text for item in value.items]
    if isinstance(value, AggregateValue):
        return {
            "aggregate": value.spec.op,
            "attribute": _ref_to_json(value.spec.attribute),
        }
    raise ValueError(f"unknown value type {type(value).__name__}")


def _value_from_json(data: Any, op: FilterOp) -> FilterValue:
    if isinstance(data, str):
        return Literal(data)
    if isinstance(data, (int, float)):
        return Literal.number(data)
    if isinstance(data, list):
        items = []
        for item in data:
            if isinstance(item, (int, float)):
                items.append(Literal.number(item))
            elif isinstance(item, str):
                items.append(Literal(item))
            else:
                raise FormatError(f"bad literal {item!r} in value array")
        if op is FilterOp.IN_RANGE:
            if len(items) != 2:
                raise FormatError("a range takes exactly two endpoints")
            return RangeValue(lo=items[0], hi=items[1])
        return ListValue(items=tuple(items))
    if isinstance(data, dict) and "aggregate" in data:
        try:
            return AggregateValue(
                AggregateSpec(op=data["aggregate"], attribute=_ref_from_json(data["attribute"]))
            )
        except KeyError as exc:
            raise FormatError(f"bad aggregate value {data!r}") from exc
    raise FormatError(f"bad filter value {data!r}")


def _filter_to_json(f: Filter) -> dict:
    out = {
        "attr": _ref_to_json(f.attr),
        "op": f.op.value,
        "value": _value_to_json(f.value),
    }
    if f.direction is not Direction.NONE:
        out["direction"] = f.direction.value
    return out


def _filter_from_json(data: Any) -> Filter:
    if not isinstance(data, dict):
        raise FormatError(f"filter must be an object, got {data!r}")
    try:
        op = FilterOp(data["op"])
    except (KeyError, ValueError):
        raise FormatError(f"bad filter op in {data!r}") from None
    if "attr" not in data or "value" not in data:
        raise FormatError(f"filter needs attr and value: {data!r}")
    value = _value_from_json(data["value"], op)
    direction = Direction(data.get("direction", "none") or "none")
    attr_raw = data["attr"]
    # A bare channel keyword in attr position pairs with the literal
    # value, mirroring the text grammar's `color = green` form.
    if isinstance(attr_raw, str) and attr_raw in {"color", "shape", "orientation", "position"}:
        if not isinstance(value, Literal):
            raise FormatError(f"channel filter {data!r} requires a literal value")
        attr = AttributeRef.by_channel(attr_raw, value.text)
    else:
        attr = _ref_from_json(attr_raw)
    return Filter(attr=attr, op=op, value=value, direction=direction)


def task_to_json(task: Task) -> dict:
    """Optional fields are omitted at their defaults so payloads stay minimal."""
    out: dict = {"kind": task.kind.value}
    if task.target is not None:
        out["target"] = _ref_to_json(task.target)
    out["filters"] = [_filter_to_json(f) for f in task.filters]
    if task.derive is not None:
        derive: dict = {
            "kind": task.derive.kind,
            "operands": [_ref_to_json(o) for o in task.derive.operands],
        }
        if task.derive.direction is not Direction.NONE:
            derive["direction"] = task.derive.direction.value
        out["derive"] = derive
    if task.subtasks:
        out["subtasks"] = [task_to_json(s) for s in task.subtasks]
    return out


def task_from_json(data: Any) -> Task:
    """Inverse of task_to_json.  Raises FormatError on malformed input,
    including structurally invalid tasks."""
    if not isinstance(data, dict):
        raise FormatError("task must be a JSON object")
    try:
        kind = TaskKind(data["kind"])
    except (KeyError, ValueError):
        raise FormatError(f"bad task kind in {data!r}") from None
    target = data.get("target")
    derive_raw = data.get("derive")
    derive = None
    if derive_raw is not None:
        if not isinstance(derive_raw, dict) or "kind" not in derive_raw:
            raise FormatError(f"bad derive spec {derive_raw!r}")
        derive = DeriveSpec(
            kind=derive_raw["kind"],
            operands=tuple(_ref_from_json(o) for o in derive_raw.get("operands", [])),
            direction=Direction(derive_raw.get("direction", "none") or "none"),
        )
    task = Task(
        kind=kind,
        target=_ref_from_json(target) if target is not None else None,
        filters=tuple(_filter_from_json(f) for f in data.get("filters", [])),
        derive=derive,
        subtasks=tuple(task_from_json(s) for s in data.get("subtasks", [])),
    )
    violations = validate(task)
    if violations:
        detail = "; ".join(f"{p}: {m}" for p, m in violations[:3])
        raise FormatError(f"task fails validation: {detail}")
    return canonicalize(task)
