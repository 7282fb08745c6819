"""Core task types and structural validation."""

from __future__ import annotations

import datetime
import enum
import re
from dataclasses import dataclass, field


class TaskKind(str, enum.Enum):
    IDENTIFY = "identify"
    COMPARE = "compare"
    AGGREGATE = "aggregate"
    TREND = "trend"
    SUM = "sum"

    __str__ = str.__str__


class TaskCategory(str, enum.Enum):
    """Reporting bucket a task kind falls into."""

    IDENTIFICATION = "identification"
    COMPARISON = "comparison"
    AGGREGATION = "aggregation"
    DERIVATION = "derivation"

    __str__ = str.__str__


_CATEGORY_OF_KIND = {
    TaskKind.IDENTIFY: TaskCategory.IDENTIFICATION,
    TaskKind.COMPARE: TaskCategory.COMPARISON,
    TaskKind.AGGREGATE: TaskCategory.AGGREGATION,
    TaskKind.TREND: TaskCategory.DERIVATION,
    TaskKind.SUM: TaskCategory.DERIVATION,
}


def task_category(kind: TaskKind) -> TaskCategory:
    """Total mapping from the five task kinds to the four categories."""
    return _CATEGORY_OF_KIND[TaskKind(kind)]


class Channel(str, enum.Enum):
    COLOR = "color"
    SHAPE = "shape"
    ORIENTATION = "orientation"
    POSITION = "position"

    __str__ = str.__str__


CHANNELS = frozenset(c.value for c in Channel)


class FilterOp(str, enum.Enum):
    EQ = "="
    GT = ">"
    LT = "<"
    IN_RANGE = "in"

    __str__ = str.__str__


class Direction(str, enum.Enum):
    TOP = "top"
    BOTTOM = "bottom"
    LEFT = "left"
    RIGHT = "right"
    NONE = "none"

    __str__ = str.__str__


AGG_OPS = ("max", "min", "avg", "sum")

_YEAR_RE = re.compile(r"^\d{4}$")
_QUARTER_RE = re.compile(r"^(\d{4})Q([1-4])$")
_DATE_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")
_NUMBER_RE = re.compile(r"^-?\d+(\.\d+)?$")

# Bare 4-digit integers in this window read as years; anything else is a
# plain number.  Evaluation against a chart coerces either way by the
# attribute's type, so the window only affects the label, not semantics.
_YEAR_LO, _YEAR_HI = 1500, 2999


def classify_literal(text: str) -> str:
    """Lexical kind of a literal: year, quarter, date, number, or text."""
    if _YEAR_RE.match(text) and _YEAR_LO <= int(text) <= _YEAR_HI:
        return "year"
    if _QUARTER_RE.match(text):
        return "quarter"
    m = _DATE_RE.match(text)
    if m:
        try:
            datetime.date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        except ValueError:
            return "text"
        return "date"
    if _NUMBER_RE.match(text):
        return "number"
    return "text"


@dataclass(frozen=True)
class Literal:
    """A scalar value kept in its surface text form.

    Equality is text equality; the lexical kind is derived, never stored,
    so construction and parsing can never disagree.
    """

    text: str

    @property
    def kind(self) -> str:
        return classify_literal(self.text)

    @staticmethod
    def number(value: float) -> "Literal":
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        return Literal(str(value))

    @staticmethod
    def year(y: int) -> "Literal":
        return Literal(f"{y:04d}")

    @staticmethod
    def quarter(y: int, q: int) -> "Literal":
        return Literal(f"{y:04d}Q{q}")

    @staticmethod
    def date(d: datetime.date) -> "Literal":
        return Literal(d.isoformat())

    def as_number(self) -> float:
        if self.kind not in ("number", "year"):
            raise ValueError(f"literal {self.text!r} is not numeric")
        return float(self.text)

    def period(self) -> tuple[int, int]:
        """Closed day-ordinal interval covered by a temporal literal.

        A year covers Jan 1 through Dec 31, a quarter its three months,
        a date a single day.  Raises ValueError for non-temporal kinds.
        """
        kind = self.kind
        if kind == "year":
            y = int(self.text)
            return (
                datetime.date(y, 1, 1).toordinal(),
                datetime.date(y, 12, 31).toordinal(),
            )
        if kind == "quarter":
            m = _QUARTER_RE.match(self.text)
            assert m is not None
            y, q = int(m.group(1)), int(m.group(2))
            start = datetime.date(y, 3 * q - 2, 1)
            if q == 4:
                end = datetime.date(y, 12, 31)
            else:
                end = datetime.date(y, 3 * q + 1, 1) - datetime.timedelta(days=1)
            return (start.toordinal(), end.toordinal())
        if kind == "date":
            o = datetime.date.fromisoformat(self.text).toordinal()
            return (o, o)
        raise ValueError(f"literal {self.text!r} is not temporal")

    def sort_key(self) -> tuple[int, float] | None:
        """Orderable key for range endpoints, None for plain text."""
        kind = self.kind
        if kind == "number":
            return (0, float(self.text))
        if kind in ("year", "quarter", "date"):
            return (1, float(self.period()[0]))
        return None


@dataclass(frozen=True)
class AttributeRef:
    """Reference to an attribute or categorical choice on a chart.

    kind is one of byName, byChannel, mixed.  Channel references point at
    a visual property ("the green line"); mixed references carry both the
    name and the channel cue.
    """

    kind: str
    name: str | None = None
    channel: Channel | None = None
    channelValue: str | None = None

    @staticmethod
    def by_name(name: str) -> "AttributeRef":
        return AttributeRef(kind="byName", name=name)

    @staticmethod
    def by_channel(channel: Channel | str, value: str) -> "AttributeRef":
        return AttributeRef(
            kind="byChannel", channel=Channel(channel), channelValue=value
        )

    @staticmethod
    def mixed(name: str, channel: Channel | str, value: str) -> "AttributeRef":
        return AttributeRef(
            kind="mixed", name=name, channel=Channel(channel), channelValue=value
        )


@dataclass(frozen=True)
class AggregateSpec:
    """An aggregate of one attribute: max, min, avg, or sum."""

    op: str
    attribute: AttributeRef


@dataclass(frozen=True)
class RangeValue:
    lo: Literal
    hi: Literal


@dataclass(frozen=True)
class ListValue:
    items: tuple[Literal, ...]


@dataclass(frozen=True)
class AggregateValue:
    spec: AggregateSpec


FilterValue = Literal | RangeValue | ListValue | AggregateValue


@dataclass(frozen=True)
class Filter:
    attr: AttributeRef
    op: FilterOp
    value: FilterValue
    direction: Direction = Direction.NONE


@dataclass(frozen=True)
class DeriveSpec:
    """A request to compute new data: rank, difference, sum, trend, growth."""

    kind: str
    operands: tuple[AttributeRef, ...]
    direction: Direction = Direction.NONE


DeriveKind = ("rank", "difference", "sum", "trend", "growth")


@dataclass(frozen=True)
class Task:
    kind: TaskKind
    target: AttributeRef | None = None
    filters: tuple[Filter, ...] = ()
    derive: DeriveSpec | None = None
    subtasks: tuple["Task", ...] = field(default=())


# Characters and tokens that would collide with the task grammar if they
# appeared inside a name or text literal.
_UNSAFE_CHARS = set("()[],;=<>@+")
_UNSAFE_TOKEN = " in "


def grammar_safe(text: str) -> bool:
    """True when text can appear verbatim in serialized task form."""
    if not text or text != text.strip():
        return False
    if any(ch in _UNSAFE_CHARS for ch in text):
        return False
    if _UNSAFE_TOKEN in text:
        return False
    return True


def _is_count_literal(value: FilterValue) -> bool:
    if not isinstance(value, Literal):
        return False
    if value.kind != "number":
        return False
    n = float(value.text)
    return n >= 0 and n == int(n)


def _check_ref(ref: AttributeRef, path: str, out: list[tuple[str, str]]) -> None:
    if ref.kind == "byName":
        if not ref.name:
            out.append((path, "byName reference needs a name"))
        elif not grammar_safe(ref.name):
            out.append((path, f"name {ref.name!r} contains reserved grammar tokens"))
        if ref.channel is not None or ref.channelValue is not None:
            out.append((path, "byName reference must not carry channel fields"))
    elif ref.kind == "byChannel":
        if ref.name is not None:
            out.append((path, "byChannel reference must not carry a name"))
        if ref.channel is None or not ref.channelValue:
            out.append((path, "byChannel reference needs channel and value"))
        elif not grammar_safe(ref.channelValue):
            out.append((path, f"channel value {ref.channelValue!r} is not grammar safe"))
    elif ref.kind == "mixed":
        if not ref.name or ref.channel is None or not ref.channelValue:
            out.append((path, "mixed reference needs name, channel, and value"))
        else:
            if not grammar_safe(ref.name):
                out.append((path, f"name {ref.name!r} contains reserved grammar tokens"))
            if not grammar_safe(ref.channelValue):
                out.append(
                    (path, f"channel value {ref.channelValue!r} is not grammar safe")
                )
    else:
        out.append((path, f"unknown reference kind {ref.kind!r}"))
    if ref.kind in ("byName", "mixed") and ref.name in CHANNELS:
        out.append((path, f"name {ref.name!r} shadows a channel keyword"))


def _check_literal(lit: Literal, path: str, out: list[tuple[str, str]]) -> None:
    if not grammar_safe(lit.text):
        out.append((path, f"literal {lit.text!r} is not grammar safe"))


def _check_value(f: Filter, path: str, out: list[tuple[str, str]]) -> None:
    value = f.value
    if isinstance(value, Literal):
        _check_literal(value, f"{path}.value", out)
        if f.op is FilterOp.IN_RANGE:
            out.append((path, "op 'in' requires a range value"))
    elif isinstance(value, RangeValue):
        if f.op is not FilterOp.IN_RANGE:
            out.append((path, "range value requires op 'in'"))
        _check_literal(value.lo, f"{path}.value.lo", out)
        _check_literal(value.hi, f"{path}.value.hi", out)
        lo_key, hi_key = value.lo.sort_key(), value.hi.sort_key()
        if lo_key is None or hi_key is None:
            out.append((f"{path}.value", "range endpoints must be orderable"))
        elif lo_key[0] != hi_key[0]:
            out.append((f"{path}.value", "range endpoints mix kinds"))
        elif lo_key > hi_key:
            out.append((f"{path}.value", "range is reversed"))
    elif isinstance(value, ListValue):
        if f.op is not FilterOp.EQ:
            out.append((path, "list value requires op '='"))
        if len(value.items) < 2:
            out.append((f"{path}.value", "list value needs at least two items"))
        for i, item in enumerate(value.items):
            _check_literal(item, f"{path}.value[{i}]", out)
    elif isinstance(value, AggregateValue):
        if f.op is FilterOp.IN_RANGE:
            out.append((path, "aggregate value cannot be used with op 'in'"))
        if value.spec.op not in AGG_OPS:
            out.append((f"{path}.value", f"unknown aggregate op {value.spec.op!r}"))
        _check_ref(value.spec.attribute, f"{path}.value.attribute", out)
    else:
        out.append((f"{path}.value", f"unknown value type {type(value).__name__}"))


def _check_filter(f: Filter, path: str, out: list[tuple[str, str]]) -> None:
    _check_ref(f.attr, f"{path}.attr", out)
    if not isinstance(f.op, FilterOp):
        out.append((path, f"unknown filter op {f.op!r}"))
        return
    _check_value(f, path, out)
    if f.attr.kind == "byChannel":
        if f.op is not FilterOp.EQ:
            out.append((path, "channel filter requires op '='"))
        elif not isinstance(f.value, Literal) or f.value.text != f.attr.channelValue:
            out.append((path, "channel filter value must repeat the channel value"))
    if f.direction is not Direction.NONE and not _is_count_literal(f.value):
        out.append((path, "direction requires a nonnegative integer count value"))


def _check_derive(d: DeriveSpec, path: str, out: list[tuple[str, str]]) -> None:
    if d.kind not in DeriveKind:
        out.append((path, f"unknown derive kind {d.kind!r}"))
        return
    arity = {"difference": (2, 2), "sum": (2, None), "rank": (1, 1), "trend": (1, 1), "growth": (1, 1)}
    lo, hi = arity[d.kind]
    if len(d.operands) < lo or (hi is not None and len(d.operands) > hi):
        out.append((path, f"derive {d.kind} takes {lo if hi == lo else f'{lo}+'} operands"))
    for i, op in enumerate(d.operands):
        _check_ref(op, f"{path}.operands[{i}]", out)
    if d.direction is not Direction.NONE and d.kind != "rank":
        out.append((path, "derive direction is only meaningful for rank"))


def validate(task: Task, path: str = "task") -> list[tuple[str, str]]:
    """Collect invariant violations; an empty list means the task is valid."""
    out: list[tuple[str, str]] = []
    if not isinstance(task.kind, TaskKind):
        out.append((path, f"unknown task kind {task.kind!r}"))
        return out
    if task.target is not None:
        _check_ref(task.target, f"{path}.target", out)
    for i, f in enumerate(task.filters):
        _check_filter(f, f"{path}.filters[{i}]", out)
    if task.derive is not None:
        _check_derive(task.derive, f"{path}.derive", out)
    if task.kind is TaskKind.COMPARE:
        if len(task.subtasks) < 2:
            out.append((path, "compare requires at least two subtasks"))
        for i, sub in enumerate(task.subtasks):
            if sub.kind is not TaskKind.IDENTIFY:
                out.append((f"{path}.subtasks[{i}]", "compare subtasks must be identify"))
            out.extend(validate(sub, f"{path}.subtasks[{i}]"))
    elif task.subtasks:
        out.append((path, f"{task.kind.value} task cannot have subtasks"))
    return out
