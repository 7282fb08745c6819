"""Canonical text form of tasks and its parser.

The shape is a parenthesized head plus semicolon-separated clauses:

    ( kind [ target ] ; filter: f, f ; derive: d ; sub: t, t )

with filters written `attr op value [@direction]`.  Channel references
appear as `color(green)` in operand positions and as a bare channel
keyword in filter-attribute position (the value then carries the channel
value, e.g. `color = green`).  Bracketed pairs mean a closed range under
op `in` and a membership list under op `=`.
"""

from __future__ import annotations

import re

from ..errors import FormatError
from .types import (
    AGG_OPS,
    CHANNELS,
    AggregateSpec,
    AggregateValue,
    AttributeRef,
    DeriveKind,
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

_CHANNEL_FUNC_RE = re.compile(
    r"^(color|shape|orientation|position)\((.+)\)$", re.DOTALL
)
_AGG_FUNC_RE = re.compile(r"^(max|min|avg|sum)\((.+)\)$", re.DOTALL)
_DERIVE_FUNC_RE = re.compile(
    r"^(rank|difference|sum|trend|growth)\((.+)\)$", re.DOTALL
)

_OP_TOKENS = ((" = ", FilterOp.EQ), (" > ", FilterOp.GT), (" < ", FilterOp.LT), (" in ", FilterOp.IN_RANGE))


# ---------------------------------------------------------------------------
# Serialization


def serialize_ref(ref: AttributeRef, *, filter_attr: bool = False) -> str:
    if ref.kind == "byName":
        return ref.name or ""
    if ref.kind == "byChannel":
        assert ref.channel is not None
        if filter_attr:
            return ref.channel.value
        return f"{ref.channel.value}({ref.channelValue})"
    if ref.kind == "mixed":
        assert ref.channel is not None
        return f"{ref.name}+{ref.channel.value}({ref.channelValue})"
    raise ValueError(f"unknown reference kind {ref.kind!r}")


def serialize_value(value: FilterValue) -> str:
    if isinstance(value, Literal):
        return value.text
    if isinstance(value, RangeValue):
        return f"[{value.lo.text}, {value.hi.text}]"
    if isinstance(value, ListValue):
        return "[" + ", ".join(item.text for item in value.items) + "]"
    if isinstance(value, AggregateValue):
        return f"{value.spec.op}({serialize_ref(value.spec.attribute)})"
    raise ValueError(f"unknown value type {type(value).__name__}")


def serialize_filter(f: Filter) -> str:
    text = f"{serialize_ref(f.attr, filter_attr=True)} {f.op.value} {serialize_value(f.value)}"
    if f.direction is not Direction.NONE:
        text += f" @{f.direction.value}"
    return text


def serialize_derive(d: DeriveSpec) -> str:
    text = f"{d.kind}(" + ", ".join(serialize_ref(o) for o in d.operands) + ")"
    if d.direction is not Direction.NONE:
        text += f" @{d.direction.value}"
    return text


def serialize_task(task: Task) -> str:
    head = task.kind.value
    if task.target is not None:
        head += f" {serialize_ref(task.target)}"
    parts = [head]
    if task.filters:
        parts.append("filter: " + ", ".join(serialize_filter(f) for f in task.filters))
    if task.derive is not None:
        parts.append("derive: " + serialize_derive(task.derive))
    if task.subtasks:
        parts.append("sub: " + ", ".join(serialize_task(s) for s in task.subtasks))
    return "(" + "; ".join(parts) + ")"


def canonicalize(task: Task) -> Task:
    """Order-insensitive normal form: filters, list items, and subtasks
    sorted by their serialized text, bytewise.  Idempotent.  Derive
    operands keep their order; difference is not commutative."""
    filters = []
    for f in task.filters:
        value = f.value
        if isinstance(value, ListValue):
            value = ListValue(tuple(sorted(value.items, key=lambda l: l.text)))
            f = Filter(attr=f.attr, op=f.op, value=value, direction=f.direction)
        filters.append(f)
    filters.sort(key=serialize_filter)
    subtasks = sorted((canonicalize(s) for s in task.subtasks), key=serialize_task)
    return Task(
        kind=task.kind,
        target=task.target,
        filters=tuple(filters),
        derive=task.derive,
        subtasks=tuple(subtasks),
    )


# ---------------------------------------------------------------------------
# Parsing


class _Cursor:
    __slots__ = ("text", "pos")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def rest(self) -> str:
        return self.text[self.pos :]

    def eat(self, token: str) -> bool:
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def expect(self, token: str) -> None:
        if not self.eat(token):
            got = self.text[self.pos : self.pos + 12]
            raise FormatError(f"expected {token!r} at position {self.pos}, found {got!r}")

    def scan_until(self, stops: tuple[str, ...]) -> str:
        """Consume text up to the first top-level stop token.

        Parentheses and brackets nest; stop tokens inside them are part
        of the scanned text.  The stop token itself is not consumed.
        """
        start = self.pos
        depth = 0
        n = len(self.text)
        while self.pos < n:
            if depth == 0 and any(self.text.startswith(s, self.pos) for s in stops):
                break
            ch = self.text[self.pos]
            if ch in "([":
                depth += 1
            elif ch in ")]":
                if depth == 0:
                    raise FormatError(f"unbalanced brackets after position {start}")
                depth -= 1
            self.pos += 1
        if depth != 0:
            raise FormatError(f"unbalanced brackets after position {start}")
        return self.text[start : self.pos]


def _split_top(text: str, sep: str) -> list[str]:
    """Split on a separator, ignoring occurrences inside () or []."""
    parts = []
    depth = 0
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise FormatError(f"unbalanced brackets in {text!r}")
        if depth == 0 and text.startswith(sep, i):
            parts.append(text[start:i])
            i += len(sep)
            start = i
            continue
        i += 1
    if depth != 0:
        raise FormatError(f"unbalanced brackets in {text!r}")
    parts.append(text[start:])
    return parts


def parse_ref(text: str) -> AttributeRef:
    text = text.strip()
    if not text:
        raise FormatError("empty attribute reference")
    plus_parts = _split_top(text, "+")
    if len(plus_parts) == 2:
        name, channel_part = plus_parts[0].strip(), plus_parts[1].strip()
        m = _CHANNEL_FUNC_RE.match(channel_part)
        if not m or not name:
            raise FormatError(f"bad mixed reference {text!r}")
        return AttributeRef.mixed(name, m.group(1), m.group(2))
    if len(plus_parts) > 2:
        raise FormatError(f"bad mixed reference {text!r}")
    m = _CHANNEL_FUNC_RE.match(text)
    if m:
        return AttributeRef.by_channel(m.group(1), m.group(2))
    if text in CHANNELS:
        raise FormatError(f"channel reference {text!r} needs a value, like {text}(green)")
    return AttributeRef.by_name(text)


def _parse_direction(text: str) -> tuple[str, Direction]:
    """Strip a trailing ' @direction' marker if present."""
    m = re.search(r" @(top|bottom|left|right)$", text)
    if m:
        return text[: m.start()], Direction(m.group(1))
    if re.search(r" @\S*$", text):
        raise FormatError(f"unknown direction marker in {text!r}")
    return text, Direction.NONE


def _parse_value(text: str, op: FilterOp) -> FilterValue:
    text = text.strip()
    if not text:
        raise FormatError("empty filter value")
    if text.startswith("["):
        if not text.endswith("]"):
            raise FormatError(f"unterminated bracket value {text!r}")
        inner = text[1:-1]
        items = [Literal(part.strip()) for part in _split_top(inner, ", ")]
        if any(not item.text for item in items):
            raise FormatError(f"empty item in bracket value {text!r}")
        if op is FilterOp.IN_RANGE:
            if len(items) != 2:
                raise FormatError("a range takes exactly two endpoints")
            return RangeValue(lo=items[0], hi=items[1])
        if op is FilterOp.EQ:
            if len(items) < 2:
                raise FormatError("a membership list needs at least two items")
            return ListValue(items=tuple(items))
        raise FormatError(f"bracket value cannot be used with op {op.value!r}")
    m = _AGG_FUNC_RE.match(text)
    if m:
        return AggregateValue(AggregateSpec(op=m.group(1), attribute=parse_ref(m.group(2))))
    return Literal(text)


def parse_filter(text: str) -> Filter:
    text = text.strip()
    # Operator tokens never occur inside names or literals, so the
    # leftmost top-level occurrence splits attribute from value.
    op_at = None
    for token, op in _OP_TOKENS:
        parts = _split_top(text, token)
        if len(parts) > 1:
            idx = len(parts[0])
            if op_at is None or idx < op_at[0]:
                op_at = (idx, token, op)
    if op_at is None:
        raise FormatError(f"filter {text!r} has no operator")
    split_at, token, op = op_at
    attr_text = text[:split_at]
    rest = text[split_at + len(token) :]
    rest, direction = _parse_direction(rest)
    value = _parse_value(rest, op)
    attr_text = attr_text.strip()
    if attr_text in CHANNELS:
        if op is not FilterOp.EQ or not isinstance(value, Literal):
            raise FormatError(f"channel filter {text!r} requires '= value'")
        attr = AttributeRef.by_channel(attr_text, value.text)
    else:
        attr = parse_ref(attr_text)
    return Filter(attr=attr, op=op, value=value, direction=direction)


def parse_derive(text: str) -> DeriveSpec:
    text, direction = _parse_direction(text.strip())
    m = _DERIVE_FUNC_RE.match(text)
    if not m:
        kinds = ", ".join(DeriveKind)
        raise FormatError(f"derive clause {text!r} must look like kind(...), kind one of {kinds}")
    operands = tuple(parse_ref(part) for part in _split_top(m.group(2), ", "))
    return DeriveSpec(kind=m.group(1), operands=operands, direction=direction)


def _parse_task(cur: _Cursor) -> Task:
    cur.expect("(")
    m = re.match(r"[a-z]+", cur.rest())
    if not m:
        raise FormatError(f"expected task kind at position {cur.pos}")
    kind_word = m.group(0)
    try:
        kind = TaskKind(kind_word)
    except ValueError:
        raise FormatError(f"unknown task kind {kind_word!r}") from None
    cur.pos += len(kind_word)

    target = None
    if cur.rest().startswith(" "):
        cur.pos += 1
        target_text = cur.scan_until(("; ", ")"))
        target = parse_ref(target_text)

    filters: list[Filter] = []
    derive: DeriveSpec | None = None
    subtasks: list[Task] = []
    while cur.eat("; "):
        if cur.eat("filter: "):
            clause = cur.scan_until(("; ", ")"))
            for part in _split_top(clause, ", "):
                filters.append(parse_filter(part))
        elif cur.eat("derive: "):
            if derive is not None:
                raise FormatError("duplicate derive clause")
            derive = parse_derive(cur.scan_until(("; ", ")")))
        elif cur.eat("sub: "):
            if subtasks:
                raise FormatError("duplicate sub clause")
            while True:
                subtasks.append(_parse_task(cur))
                if not cur.eat(", "):
                    break
        else:
            got = cur.rest()[:16]
            raise FormatError(
                f"expected 'filter: ', 'derive: ', or 'sub: ' at position {cur.pos}, found {got!r}"
            )
    cur.expect(")")
    return Task(
        kind=kind,
        target=target,
        filters=tuple(filters),
        derive=derive,
        subtasks=tuple(subtasks),
    )


def parse_task_text(text: str) -> Task:
    """Parse task text into its canonical form.

    Clause and filter order in the input is free; the returned task is
    always canonicalized.  Raises FormatError on any deviation from the
    grammar, including structurally invalid but grammatical input.
    """
    if not isinstance(text, str):
        raise FormatError("task text must be a string")
    cur = _Cursor(text.strip())
    task = _parse_task(cur)
    if cur.pos != len(cur.text):
        raise FormatError(f"trailing characters after task: {cur.rest()!r}")
    violations = validate(task)
    if violations:
        detail = "; ".join(f"{p}: {m}" for p, m in violations[:3])
        raise FormatError(f"task fails validation: {detail}")
    return canonicalize(task)
