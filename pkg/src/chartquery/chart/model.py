"""Chart documents and the mutable-by-replacement chart state.

A chart document declares attributes, rows, a mark, and encodings; the
loader checks it strictly and returns an immutable ChartSpec.  All live
presentation facts (visible rows, highlights, annotations, axis domains,
derived series, stacking, sort order) live on ChartState, which every
manipulation replaces wholesale rather than mutating.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from dataclasses import dataclass, replace

from ..errors import ConsistencyError, SchemaError
from ..taskir.types import CHANNELS, classify_literal, grammar_safe

MARKS = ("bar", "line", "area")
ATTR_TYPES = ("categorical", "temporal", "quantitative")
GRANULARITIES = ("year", "quarter", "date")


@dataclass(frozen=True)
class Attribute:
    name: str
    type: str
    choices: tuple[str, ...] = ()
    granularity: str | None = None
    span: tuple[str, str] | None = None
    range: tuple[float, float] | None = None
    synonyms: tuple[str, ...] = ()
    unit: str | None = None


@dataclass(frozen=True)
class Encodings:
    x: str
    y: str
    color: str | None = None


@dataclass(frozen=True)
class ChannelBinding:
    channel: str
    value: str
    choice: str


@dataclass(frozen=True)
class ChartSpec:
    mark: str
    attributes: tuple[Attribute, ...]
    rows: tuple[dict, ...]
    encodings: Encodings
    bindings: tuple[ChannelBinding, ...] = ()
    title: str = ""

    def attribute(self, name: str) -> Attribute | None:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None

    def categorical(self) -> Attribute | None:
        for attr in self.attributes:
            if attr.type == "categorical":
                return attr
        return None

    def temporal(self) -> Attribute | None:
        for attr in self.attributes:
            if attr.type == "temporal":
                return attr
        return None

    def quantitatives(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.attributes if a.type == "quantitative")

    def binding_for(self, channel: str, value: str) -> ChannelBinding | None:
        for b in self.bindings:
            if b.channel == channel and b.value.casefold() == value.casefold():
                return b
        return None

    def content_hash(self) -> str:
        doc = spec_to_json(self)
        payload = json.dumps(doc, sort_keys=True, ensure_ascii=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Annotation:
    """A text label anchored in data space, optionally with a guideline.

    x is the serialized axis position (timestamp text or category);
    y the quantitative position.  guideline draws a full-width or
    full-height rule through the anchor.
    """

    text: str
    x: str | None = None
    y: float | None = None
    guideline: str | None = None  # "horizontal" | "vertical" | None


@dataclass(frozen=True)
class DerivedSeries:
    """Data produced by a derive manipulation, kept beside the base rows.

    kind "data" rows render as an extra series; kind "rank" rows carry
    per-category rank labels.  provenance records the derivation text
    that produced the series.
    """

    name: str
    rows: tuple[dict, ...]
    provenance: str
    kind: str = "data"


@dataclass(frozen=True)
class ChartState:
    spec: ChartSpec
    visible: frozenset[int]
    highlights: tuple[tuple[int, str], ...] = ()
    annotations: tuple[Annotation, ...] = ()
    x_domain: tuple[str, str] | None = None
    y_domain: tuple[float, float] | None = None
    derived: tuple[DerivedSeries, ...] = ()
    mark: str = "line"
    stacked: bool = False
    aligned: bool = False
    sort_key: str | None = None
    sort_ascending: bool = False

    def base_count(self) -> int:
        return len(self.spec.rows)

    def total_rows(self) -> int:
        return self.base_count() + sum(
            len(d.rows) for d in self.derived if d.kind == "data"
        )

    def indexed_rows(self) -> list[tuple[int, dict, str | None]]:
        """Every addressable row: (index, row, derived series name or None)."""
        out = [(i, row, None) for i, row in enumerate(self.spec.rows)]
        next_idx = len(self.spec.rows)
        for series in self.derived:
            if series.kind != "data":
                continue
            for row in series.rows:
                out.append((next_idx, row, series.name))
                next_idx += 1
        return out

    def visible_rows(self) -> list[tuple[int, dict, str | None]]:
        return [(i, row, d) for i, row, d in self.indexed_rows() if i in self.visible]

    def highlight_map(self) -> dict[int, str]:
        return dict(self.highlights)


def _path(*parts) -> str:
    out = ""
    for part in parts:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out = f"{out}.{part}" if out else str(part)
    return out


def _require(doc: dict, key: str, types, path: str):
    if key not in doc:
        raise SchemaError(f"{_path(path, key)}: missing required field")
    value = doc[key]
    if not isinstance(value, types):
        raise SchemaError(f"{_path(path, key)}: wrong type {type(value).__name__}")
    return value


def _load_attribute(doc, idx: int) -> Attribute:
    path = f"attributes[{idx}]"
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected an object")
    name = _require(doc, "name", str, path)
    if not grammar_safe(name):
        raise SchemaError(f"{path}.name: {name!r} contains reserved characters")
    if name in CHANNELS:
        raise SchemaError(f"{path}.name: {name!r} shadows a channel keyword")
    atype = _require(doc, "type", str, path)
    if atype not in ATTR_TYPES:
        raise SchemaError(f"{path}.type: expected one of {ATTR_TYPES}, got {atype!r}")
    synonyms = tuple(doc.get("synonyms", ()))
    if not all(isinstance(s, str) for s in synonyms):
        raise SchemaError(f"{path}.synonyms: expected a list of strings")

    choices: tuple[str, ...] = ()
    granularity = None
    span = None
    vrange = None
    if atype == "categorical":
        raw = _require(doc, "choices", list, path)
        if not raw or not all(isinstance(c, str) for c in raw):
            raise SchemaError(f"{path}.choices: expected a nonempty list of strings")
        for c in raw:
            if not grammar_safe(c):
                raise SchemaError(f"{path}.choices: {c!r} contains reserved characters")
        if len(set(raw)) != len(raw):
            raise SchemaError(f"{path}.choices: duplicate choice")
        choices = tuple(raw)
    elif atype == "temporal":
        granularity = _require(doc, "granularity", str, path)
        if granularity not in GRANULARITIES:
            raise SchemaError(
                f"{path}.granularity: expected one of {GRANULARITIES}, got {granularity!r}"
            )
        if "span" in doc:
            raw = doc["span"]
            if not (isinstance(raw, list) and len(raw) == 2):
                raise SchemaError(f"{path}.span: expected [start, end]")
            span = (str(raw[0]), str(raw[1]))
    else:
        if "range" in doc:
            raw = doc["range"]
            if not (
                isinstance(raw, list)
                and len(raw) == 2
                and all(isinstance(v, (int, float)) for v in raw)
            ):
                raise SchemaError(f"{path}.range: expected [low, high] numbers")
            vrange = (float(raw[0]), float(raw[1]))
    return Attribute(
        name=name,
        type=atype,
        choices=choices,
        granularity=granularity,
        span=span,
        range=vrange,
        synonyms=synonyms,
        unit=doc.get("unit"),
    )


def _check_temporal_value(value, attr: Attribute) -> bool:
    if not isinstance(value, str):
        return False
    kind = classify_literal(value)
    return kind == attr.granularity or (kind == "number" and attr.granularity == "year")


def _check_row(row, idx: int, attributes: tuple[Attribute, ...]) -> None:
    if not isinstance(row, dict):
        raise ConsistencyError(f"rows[{idx}]: expected an object")
    for attr in attributes:
        if attr.name not in row:
            raise ConsistencyError(f"rows[{idx}]: missing value for {attr.name!r}")
        value = row[attr.name]
        if attr.type == "categorical":
            if value not in attr.choices:
                raise ConsistencyError(
                    f"rows[{idx}].{attr.name}: {value!r} is not a declared choice"
                )
        elif attr.type == "temporal":
            if not _check_temporal_value(value, attr):
                raise ConsistencyError(
                    f"rows[{idx}].{attr.name}: {value!r} is not a {attr.granularity} timestamp"
                )
        else:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConsistencyError(f"rows[{idx}].{attr.name}: {value!r} is not numeric")


def load_chart_spec(doc: dict) -> ChartSpec:
    """Validate a chart document and return the immutable spec.

    Raises SchemaError for shape problems (message carries the JSON
    path) and ConsistencyError for rows that contradict the attribute
    declarations.
    """
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    mark = _require(doc, "mark", str, "")
    if mark not in MARKS:
        raise SchemaError(f"mark: expected one of {MARKS}, got {mark!r}")
    raw_attrs = _require(doc, "attributes", list, "")
    if not raw_attrs:
        raise SchemaError("attributes: must not be empty")
    attributes = tuple(_load_attribute(a, i) for i, a in enumerate(raw_attrs))
    names = [a.name for a in attributes]
    if len(set(names)) != len(names):
        raise SchemaError("attributes: duplicate attribute name")

    enc_doc = _require(doc, "encodings", dict, "")
    x = _require(enc_doc, "x", str, "encodings")
    y = _require(enc_doc, "y", str, "encodings")
    color = enc_doc.get("color")
    for axis, attr_name in (("x", x), ("y", y)) + ((("color", color),) if color else ()):
        if attr_name not in names:
            raise SchemaError(f"encodings.{axis}: unknown attribute {attr_name!r}")
    encodings = Encodings(x=x, y=y, color=color)

    raw_rows = _require(doc, "rows", list, "")
    if not raw_rows:
        raise ConsistencyError("rows: a chart needs at least one row")
    for i, row in enumerate(raw_rows):
        _check_row(row, i, attributes)

    bindings = []
    for i, b in enumerate(doc.get("channelBindings", [])):
        path = f"channelBindings[{i}]"
        if not isinstance(b, dict):
            raise SchemaError(f"{path}: expected an object")
        channel = _require(b, "channel", str, path)
        if channel not in CHANNELS:
            raise SchemaError(f"{path}.channel: unknown channel {channel!r}")
        value = _require(b, "value", str, path)
        choice = _require(b, "choice", str, path)
        bound = None
        for attr in attributes:
            if attr.type == "categorical" and choice in attr.choices:
                bound = attr
        if bound is None:
            raise ConsistencyError(f"{path}.choice: {choice!r} is not any categorical choice")
        bindings.append(ChannelBinding(channel=channel, value=value, choice=choice))

    title = doc.get("title", "")
    if not isinstance(title, str):
        raise SchemaError("title: expected a string")
    return ChartSpec(
        mark=mark,
        attributes=attributes,
        rows=tuple(dict(r) for r in raw_rows),
        encodings=encodings,
        bindings=tuple(bindings),
        title=title,
    )


def spec_to_json(spec: ChartSpec) -> dict:
    attrs = []
    for a in spec.attributes:
        d: dict = {"name": a.name, "type": a.type}
        if a.type == "categorical":
            d["choices"] = list(a.choices)
        if a.granularity:
            d["granularity"] = a.granularity
        if a.span:
            d["span"] = list(a.span)
        if a.range:
            d["range"] = list(a.range)
        if a.synonyms:
            d["synonyms"] = list(a.synonyms)
        if a.unit:
            d["unit"] = a.unit
        attrs.append(d)
    enc = {"x": spec.encodings.x, "y": spec.encodings.y}
    if spec.encodings.color:
        enc["color"] = spec.encodings.color
    doc = {
        "mark": spec.mark,
        "attributes": attrs,
        "rows": [dict(r) for r in spec.rows],
        "encodings": enc,
    }
    if spec.bindings:
        doc["channelBindings"] = [
            {"channel": b.channel, "value": b.value, "choice": b.choice}
            for b in spec.bindings
        ]
    if spec.title:
        doc["title"] = spec.title
    return doc


def temporal_period(text: str) -> tuple[int, int]:
    """Closed day-ordinal interval for a timestamp string."""
    kind = classify_literal(str(text))
    if kind == "number":
        kind = "year"  # plain numbers on a temporal axis read as years
    if kind == "year":
        y = int(text)
        return (
            datetime.date(y, 1, 1).toordinal(),
            datetime.date(y, 12, 31).toordinal(),
        )
    if kind == "quarter":
        y, q = int(text[:4]), int(text[5])
        start = datetime.date(y, 3 * q - 2, 1)
        end = (
            datetime.date(y, 12, 31)
            if q == 4
            else datetime.date(y, 3 * q + 1, 1) - datetime.timedelta(days=1)
        )
        return (start.toordinal(), end.toordinal())
    if kind == "date":
        o = datetime.date.fromisoformat(text).toordinal()
        return (o, o)
    raise ValueError(f"{text!r} is not a timestamp")


def data_extent(state: ChartState) -> tuple[tuple[str, str] | None, tuple[float, float]]:
    """(x temporal extent, y extent) over visible rows and derived data."""
    spec = state.spec
    t_attr = spec.temporal()
    y_name = spec.encodings.y
    xs: list[tuple[int, str]] = []
    ys: list[float] = []
    for _, row, series in state.visible_rows():
        if t_attr and t_attr.name in row:
            xs.append((temporal_period(str(row[t_attr.name]))[0], str(row[t_attr.name])))
        value = row.get(y_name)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            ys.append(float(value))
    x_extent = None
    if xs:
        xs.sort()
        x_extent = (xs[0][1], xs[-1][1])
    if not ys:
        ys = [0.0]
    return x_extent, (min(ys), max(ys))


def initial_state(spec: ChartSpec) -> ChartState:
    state = ChartState(
        spec=spec,
        visible=frozenset(range(len(spec.rows))),
        mark=spec.mark,
    )
    x_extent, y_extent = data_extent(state)
    return replace(state, x_domain=x_extent, y_domain=y_extent)


def state_to_json(state: ChartState) -> dict:
    """Canonical JSON image of a state, stable across equal states."""
    return {
        "spec": state.spec.content_hash(),
        "visible": sorted(state.visible),
        "highlights": [list(h) for h in sorted(state.highlights)],
        "annotations": [
            {"text": a.text, "x": a.x, "y": a.y, "guideline": a.guideline}
            for a in state.annotations
        ],
        "xDomain": list(state.x_domain) if state.x_domain else None,
        "yDomain": list(state.y_domain) if state.y_domain else None,
        "derived": [
            {
                "name": d.name,
                "rows": [dict(r) for r in d.rows],
                "provenance": d.provenance,
                "kind": d.kind,
            }
            for d in state.derived
        ],
        "mark": state.mark,
        "stacked": state.stacked,
        "aligned": state.aligned,
        "sortKey": state.sort_key,
        "sortAscending": state.sort_ascending,
    }


def state_hash(state: ChartState) -> str:
    payload = json.dumps(
        state_to_json(state), sort_keys=True, ensure_ascii=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
