"""Derivation arithmetic: materializing derive specs into data series."""

from __future__ import annotations

from ..chart.model import ChartState, DerivedSeries, temporal_period
from ..chart.resolve import resolve_attribute
from ..errors import MissingOperand, NonOverlappingDomains, TypeMismatch
from ..taskir.grammar import serialize_derive
from ..taskir.types import AttributeRef, DeriveSpec, Direction


def _numeric(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def operand_kind(
    ref: AttributeRef, state: ChartState, *, use_synonyms: bool = True
) -> tuple[str, str]:
    """Classify one operand: ("series"|"column"|"derived", resolved name)."""
    derived = {d.name for d in state.derived if d.kind == "data"}
    if ref.kind == "byName" and ref.name in derived:
        return "derived", ref.name or ""
    res = resolve_attribute(ref, state.spec, use_synonyms=use_synonyms)
    if res.kind == "choice":
        return "series", res.choice or ""
    if res.attribute.type == "quantitative":
        return "column", res.attribute.name
    raise TypeMismatch(f"cannot derive data from {res.attribute.name!r}")


def _series_points(state: ChartState, name: str, kind: str) -> dict[str, float]:
    """Visible values of one series keyed by timestamp text ("" when none)."""
    spec = state.spec
    y_name = spec.encodings.y
    t_attr = spec.temporal()
    cat = spec.categorical()
    pts: dict[str, float] = {}
    for _, row, series in state.visible_rows():
        if kind == "derived":
            if series != name:
                continue
        else:
            if series is not None or cat is None:
                continue
            if str(row.get(cat.name, "")).casefold() != name.casefold():
                continue
        v = row.get(y_name)
        if not _numeric(v):
            continue
        key = str(row[t_attr.name]) if t_attr and t_attr.name in row else ""
        pts[key] = float(v)
    return pts


def _focused_base_rows(state: ChartState) -> list[dict]:
    """Base rows a derivation should read: the focused set when one exists."""
    focus = {i for i, m in state.highlights if m == "focus"}
    rows = [
        (idx, row)
        for idx, row, series in state.visible_rows()
        if series is None and (not focus or idx in focus)
    ]
    return [row for _, row in rows]


def _combine(
    spec: DeriveSpec, state: ChartState, name: str | None, use_synonyms: bool
) -> DerivedSeries:
    if len(spec.operands) < 2:
        raise MissingOperand(f"{spec.kind} needs at least two operands")
    if spec.kind == "difference" and len(spec.operands) != 2:
        raise TypeMismatch("difference is defined on exactly two operands")
    resolved = [operand_kind(o, state, use_synonyms=use_synonyms) for o in spec.operands]
    kinds = {k for k, _ in resolved}
    chart = state.spec
    y_name = chart.encodings.y
    t_attr = chart.temporal()
    cat = chart.categorical()
    provenance = serialize_derive(spec)
    default = _combine_name(spec.kind, [n for _, n in resolved])

    if kinds == {"column"}:
        cols = [n for _, n in resolved]
        rows = []
        for row in _focused_base_rows(state):
            values = [row.get(c) for c in cols]
            if not all(_numeric(v) for v in values):
                missing = cols[[_numeric(v) for v in values].index(False)]
                raise MissingOperand(f"no value for {missing!r}")
            total = sum(float(v) for v in values)
            if spec.kind == "difference":
                total = float(values[0]) - float(values[1])
            out = {y_name: total}
            if cat is not None and cat.name in row:
                out[cat.name] = row[cat.name]
            if t_attr is not None and t_attr.name in row:
                out[t_attr.name] = row[t_attr.name]
            rows.append(out)
        if not rows:
            raise MissingOperand("no visible rows to combine")
        return DerivedSeries(name or default, tuple(rows), provenance)

    if "column" in kinds:
        raise TypeMismatch("cannot mix series and attribute operands")

    points = [_series_points(state, n, k) for k, n in resolved]
    for (_, n), pts in zip(resolved, points):
        if not pts:
            raise MissingOperand(f"{n!r} has no visible data")
    shared = set(points[0])
    for pts in points[1:]:
        shared &= set(pts)
    if not shared:
        raise NonOverlappingDomains(
            f"{spec.kind} operands share no {t_attr.name if t_attr else 'x'} positions"
        )
    keys = sorted(shared, key=lambda s: temporal_period(s)[0] if s else 0)
    rows = []
    for key in keys:
        total = sum(pts[key] for pts in points)
        if spec.kind == "difference":
            total = points[0][key] - points[1][key]
        out = {y_name: total}
        if key:
            assert t_attr is not None
            out[t_attr.name] = key
        rows.append(out)
    return DerivedSeries(name or default, tuple(rows), provenance)


def _combine_name(kind: str, names: list[str]) -> str:
    if len(names) > 1:
        joined = ", ".join(names[:-1]) + f" and {names[-1]}"
    else:
        joined = names[0] if names else ""
    return f"difference of {joined}" if kind == "difference" else f"combined {joined}"


def _rank(
    spec: DeriveSpec, state: ChartState, name: str | None, use_synonyms: bool
) -> DerivedSeries:
    chart = state.spec
    cat = chart.categorical()
    if cat is None:
        raise TypeMismatch("ranking needs a categorical attribute")
    ref = spec.operands[0] if spec.operands else AttributeRef.by_name(chart.encodings.y)
    kind, col = operand_kind(ref, state, use_synonyms=use_synonyms)
    if kind != "column":
        raise TypeMismatch(f"rank operand {col!r} is not a quantitative attribute")
    totals: dict[str, list[float]] = {}
    for _, row, series in state.visible_rows():
        if series is not None:
            continue
        v = row.get(col)
        if _numeric(v) and cat.name in row:
            totals.setdefault(str(row[cat.name]), []).append(float(v))
    if not totals:
        raise MissingOperand(f"no visible values of {col!r} to rank")
    means = {c: sum(vs) / len(vs) for c, vs in totals.items()}
    descending = spec.direction is not Direction.BOTTOM
    distinct = sorted(set(means.values()), reverse=descending)
    rank_of = {v: i + 1 for i, v in enumerate(distinct)}
    rows = tuple(
        {"category": c, "rank": rank_of[means[c]]}
        for c in sorted(means, key=lambda c: (rank_of[means[c]], c))
    )
    return DerivedSeries(
        name or f"{col} rank", rows, serialize_derive(spec), kind="rank"
    )


def _trend(
    spec: DeriveSpec, state: ChartState, name: str | None, use_synonyms: bool
) -> DerivedSeries:
    if not spec.operands:
        raise MissingOperand("trend needs an operand series")
    kind, op_name = operand_kind(spec.operands[0], state, use_synonyms=use_synonyms)
    if kind == "column":
        raise TypeMismatch("trend runs over a series, not an attribute")
    pts = _series_points(state, op_name, kind)
    if not pts:
        raise MissingOperand(f"{op_name!r} has no visible data")
    t_attr = state.spec.temporal()
    y_name = state.spec.encodings.y
    keys = sorted(pts, key=lambda s: temporal_period(s)[0] if s else 0)
    rows = tuple(
        {y_name: pts[k], **({t_attr.name: k} if t_attr and k else {})} for k in keys
    )
    return DerivedSeries(name or f"{op_name} trend", rows, serialize_derive(spec))


def _growth(
    spec: DeriveSpec,
    state: ChartState,
    name: str | None,
    use_synonyms: bool,
    mode: str,
) -> DerivedSeries:
    if not spec.operands:
        raise MissingOperand("growth needs an operand series")
    rows = []
    for ref in spec.operands:
        kind, op_name = operand_kind(ref, state, use_synonyms=use_synonyms)
        if kind == "column":
            raise TypeMismatch("growth runs over a series, not an attribute")
        pts = _series_points(state, op_name, kind)
        if not pts:
            raise MissingOperand(f"{op_name!r} has no visible data")
        keys = sorted(pts, key=lambda s: temporal_period(s)[0] if s else 0)
        first, last = pts[keys[0]], pts[keys[-1]]
        if mode == "delta":
            value = last - first
        else:
            if first == 0:
                raise TypeMismatch(f"{op_name!r} starts at zero; ratio growth undefined")
            value = last / first
        rows.append({"category": op_name, "growth": value})
    return DerivedSeries(
        name or "growth", tuple(rows), serialize_derive(spec), kind="stat"
    )


def compute_derive(
    spec: DeriveSpec,
    state: ChartState,
    *,
    name: str | None = None,
    use_synonyms: bool = True,
    growth_mode: str = "ratio",
) -> DerivedSeries:
    """Evaluate a derive spec against the visible data.

    sum and difference join series operands pointwise on shared x
    positions (inner join); attribute operands combine per row instead.
    rank assigns 1-based dense ranks per category, descending unless the
    direction says @bottom, ties listed alphabetically.  trend copies
    the operand's visible window.  growth reports last/first per series
    (or last-first with growth_mode "delta").
    """
    if spec.kind in ("sum", "difference"):
        return _combine(spec, state, name, use_synonyms)
    if spec.kind == "rank":
        return _rank(spec, state, name, use_synonyms)
    if spec.kind == "trend":
        return _trend(spec, state, name, use_synonyms)
    if spec.kind == "growth":
        return _growth(spec, state, name, use_synonyms, growth_mode)
    raise TypeMismatch(f"unknown derivation {spec.kind!r}")
