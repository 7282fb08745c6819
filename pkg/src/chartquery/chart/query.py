"""Row selection: evaluating filter conjunctions against chart state."""

from __future__ import annotations

from ..errors import TypeMismatch, UnresolvableReference
from ..taskir.types import (
    AggregateValue,
    AttributeRef,
    Direction,
    Filter,
    FilterOp,
    ListValue,
    Literal,
    RangeValue,
)
from .model import Attribute, ChartState, temporal_period
from .resolve import resolve_attribute


def _agg(op: str, values: list[float]) -> float:
    if op == "max":
        return max(values)
    if op == "min":
        return min(values)
    if op == "avg":
        return sum(values) / len(values)
    if op == "sum":
        return sum(values)
    raise ValueError(f"unknown aggregate op {op!r}")


def _numeric_column(state: ChartState, name: str, *, use_synonyms: bool) -> list[float]:
    """Visible numeric values of an attribute or derived series."""
    derived_names = {d.name for d in state.derived if d.kind == "data"}
    if name in derived_names:
        y_name = state.spec.encodings.y
        return [
            float(row[y_name])
            for _, row, series in state.visible_rows()
            if series == name and isinstance(row.get(y_name), (int, float))
        ]
    res = resolve_attribute(
        AttributeRef.by_name(name), state.spec, use_synonyms=use_synonyms
    )
    if res.kind != "attribute" or res.attribute.type != "quantitative":
        raise TypeMismatch(f"{name!r} is not a quantitative attribute")
    col = res.attribute.name
    return [
        float(row[col])
        for _, row, _series in state.visible_rows()
        if isinstance(row.get(col), (int, float))
    ]


def eval_aggregate(
    value: AggregateValue, state: ChartState, *, use_synonyms: bool = True
) -> float:
    """Evaluate max/min/avg/sum of an attribute over the visible rows."""
    ref = value.spec.attribute
    if ref.kind != "byName":
        res = resolve_attribute(ref, state.spec, use_synonyms=use_synonyms)
        name = res.attribute.name if res.kind == "attribute" else res.choice
    else:
        name = ref.name
    values = _numeric_column(state, name or "", use_synonyms=use_synonyms)
    if not values:
        raise TypeMismatch(f"no visible values to aggregate for {name!r}")
    return _agg(value.spec.op, values)


def _match_categorical(row_value, f: Filter, attr: Attribute) -> bool:
    if f.op is not FilterOp.EQ:
        raise TypeMismatch(f"op {f.op.value!r} is not defined on categorical {attr.name!r}")
    if isinstance(f.value, Literal):
        wanted = [f.value.text]
    elif isinstance(f.value, ListValue):
        wanted = [item.text for item in f.value.items]
    else:
        raise TypeMismatch(f"categorical filter on {attr.name!r} needs literal values")
    row_cf = str(row_value).casefold()
    return any(w.casefold() == row_cf for w in wanted)


def _match_temporal(row_value, f: Filter, attr: Attribute) -> bool:
    try:
        row_period = temporal_period(str(row_value))
    except ValueError:
        return False
    if f.op is FilterOp.IN_RANGE:
        assert isinstance(f.value, RangeValue)
        lo = temporal_period(f.value.lo.text)
        hi = temporal_period(f.value.hi.text)
        return row_period[0] >= lo[0] and row_period[1] <= hi[1]
    if not isinstance(f.value, Literal):
        raise TypeMismatch(f"temporal filter on {attr.name!r} needs a timestamp value")
    period = temporal_period(f.value.text)
    if f.op is FilterOp.EQ:
        # Equality against a coarser timestamp means containment.
        return row_period[0] >= period[0] and row_period[1] <= period[1]
    if f.op is FilterOp.GT:
        return row_period[0] > period[1]
    if f.op is FilterOp.LT:
        return row_period[1] < period[0]
    raise TypeMismatch(f"op {f.op.value!r} is not defined on temporal {attr.name!r}")


def _match_quantitative(row_value, f: Filter, threshold: float | None) -> bool:
    if not isinstance(row_value, (int, float)) or isinstance(row_value, bool):
        return False
    v = float(row_value)
    if f.op is FilterOp.IN_RANGE:
        assert isinstance(f.value, RangeValue)
        try:
            lo, hi = f.value.lo.as_number(), f.value.hi.as_number()
        except ValueError:
            raise TypeMismatch("quantitative range needs numeric endpoints") from None
        return lo <= v <= hi
    assert threshold is not None
    if f.op is FilterOp.EQ:
        return v == threshold
    if f.op is FilterOp.GT:
        return v > threshold
    return v < threshold


def query_rows(
    filters: tuple[Filter, ...] | list[Filter],
    state: ChartState,
    *,
    use_synonyms: bool = True,
) -> frozenset[int]:
    """Indices of visible rows matching every filter.

    Aggregate filter values are evaluated against the currently visible
    rows before any narrowing, so `value = max(value)` selects the rows
    attaining the current maximum.  Returns an empty set rather than
    raising when nothing matches.
    """
    selected = set(state.visible)
    derived_names = {d.name for d in state.derived if d.kind == "data"}
    rows = state.indexed_rows()
    for f in filters:
        if f.direction is not Direction.NONE:
            raise TypeMismatch(
                "rank-count filters are materialized by the planner, not row predicates"
            )
        # Resolve what the filter talks about.
        attr: Attribute | None = None
        series_name: str | None = None
        if f.attr.kind == "byName" and f.attr.name in derived_names:
            series_name = f.attr.name
        else:
            res = resolve_attribute(f.attr, state.spec, use_synonyms=use_synonyms)
            if f.attr.kind == "byChannel":
                # `color = green` narrows the bound attribute to its choice.
                f = Filter(
                    attr=f.attr,
                    op=FilterOp.EQ,
                    value=Literal(res.choice or ""),
                    direction=f.direction,
                )
            elif res.kind == "choice":
                raise TypeMismatch(
                    f"filter attribute resolves to choice {res.choice!r}; filter on "
                    f"{res.attribute.name!r} instead"
                )
            attr = res.attribute

        threshold: float | None = None
        if isinstance(f.value, AggregateValue):
            threshold = eval_aggregate(f.value, state, use_synonyms=use_synonyms)
        elif isinstance(f.value, Literal) and f.op in (FilterOp.EQ, FilterOp.GT, FilterOp.LT):
            if (attr is not None and attr.type == "quantitative") or series_name:
                try:
                    threshold = f.value.as_number()
                except ValueError:
                    raise TypeMismatch(
                        f"value {f.value.text!r} is not numeric"
                    ) from None

        matched = set()
        for idx, row, row_series in rows:
            if idx not in selected:
                continue
            if series_name is not None:
                if row_series != series_name:
                    continue
                value = row.get(state.spec.encodings.y)
                if _match_quantitative(value, f, threshold):
                    matched.add(idx)
                continue
            assert attr is not None
            if row_series is not None and attr.name not in row:
                continue
            value = row.get(attr.name)
            if value is None:
                continue
            if attr.type == "categorical":
                if _match_categorical(value, f, attr):
                    matched.add(idx)
            elif attr.type == "temporal":
                if _match_temporal(value, f, attr):
                    matched.add(idx)
            else:
                if isinstance(f.value, (RangeValue,)):
                    if _match_quantitative(value, f, None):
                        matched.add(idx)
                elif threshold is not None:
                    if _match_quantitative(value, f, threshold):
                        matched.add(idx)
                else:
                    raise TypeMismatch(
                        f"filter on quantitative {attr.name!r} needs a numeric value"
                    )
        selected &= matched
    return frozenset(selected)
