"""Task plans: ordered manipulation steps that answer a task in place.

A plan is built bottom-up.  Filter clauses come first (emphasis or row
removal), derivations follow, and output emphasis such as annotations
lands last.  The planner applies each step to a shadow state as it
goes, so row indices, aggregate thresholds and derived names are always
computed against the chart exactly as the viewer will see it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import date

from ..chart.model import ChartState, Annotation, data_extent, temporal_period
from ..chart.query import query_rows
from ..chart.resolve import resolve_attribute, resolve_channel_refs
from ..errors import EmptySelection, TypeMismatch, UnplannableTask
from ..taskir.grammar import serialize_filter
from ..taskir.types import (
    AggregateValue,
    AttributeRef,
    DeriveSpec,
    Direction,
    Filter,
    FilterOp,
    Task,
    TaskKind,
)
from .derive import operand_kind
from .executor import apply
from .steps import (
    PHASES,
    Annotate,
    Derive,
    Highlight,
    ManipStep,
    Rearrange,
    Reduce,
    Reencode,
    Rescale,
)


@dataclass(frozen=True)
class PlanPolicy:
    """Tunable thresholds controlling how tasks map to manipulations.

    highlight_threshold: keep context when at most this fraction of
    series is selected; larger categorical selections cut instead.
    context_padding: fraction of the full time span added around a
    narrow window.  narrow_window: a window under this fraction of the
    full span counts as narrow.  annotation_cap: most rows a plain
    identification will label individually.
    """

    highlight_threshold: float = 0.5
    context_padding: float = 0.10
    narrow_window: float = 0.05
    annotation_cap: int = 3
    growth_mode: str = "ratio"


class _Ctx:
    """Shadow state threaded through planning; every step is applied."""

    def __init__(self, state: ChartState, policy: PlanPolicy, use_synonyms: bool):
        self.state = state
        self.policy = policy
        self.syn = use_synonyms
        self.steps: list[ManipStep] = []

    def push(self, step: ManipStep) -> None:
        self.state = apply(step, self.state, use_synonyms=self.syn)
        self.steps.append(step)

    def rows(self, filters) -> frozenset[int]:
        return query_rows(filters, self.state, use_synonyms=self.syn)

    def scoped_rows(self, f: Filter, scope: frozenset[int]) -> frozenset[int]:
        """Rows matching f with aggregate values read over scope only.

        `value = max(value)` must mean the maximum of the rows the other
        clauses picked out, not of everything on screen.
        """
        shadow = replace(self.state, visible=scope)
        return query_rows([f], shadow, use_synonyms=self.syn)


def _fmt_num(v: float) -> str:
    return f"{v:g}"


def _filter_class(f: Filter, state: ChartState, use_synonyms: bool) -> str:
    if f.direction is not Direction.NONE or (
        f.attr.kind == "byName" and f.attr.name == "rank"
    ):
        return "rank"
    derived = {d.name for d in state.derived if d.kind == "data"}
    if f.attr.kind == "byName" and f.attr.name in derived:
        base_type = "quantitative"
    else:
        res = resolve_attribute(f.attr, state.spec, use_synonyms=use_synonyms)
        if res.kind == "choice" or res.attribute.type == "categorical":
            base_type = "categorical"
        else:
            base_type = res.attribute.type
    if base_type != "quantitative":
        return base_type
    if (
        f.op is FilterOp.EQ
        and isinstance(f.value, AggregateValue)
        and f.value.spec.op in ("max", "min")
    ):
        return "extreme"
    return "quantitative"


def _split_filters(filters, state: ChartState, use_synonyms: bool) -> dict[str, list[Filter]]:
    out: dict[str, list[Filter]] = {
        "categorical": [],
        "temporal": [],
        "quantitative": [],
        "extreme": [],
        "rank": [],
    }
    for f in filters:
        out[_filter_class(f, state, use_synonyms)].append(f)
    return out


def _visible_series(state: ChartState) -> set[str]:
    cat = state.spec.categorical()
    if cat is None:
        return set()
    return {
        str(row[cat.name])
        for _, row, series in state.visible_rows()
        if series is None and cat.name in row
    }


def _series_of_rows(state: ChartState, rows: frozenset[int]) -> set[str]:
    cat = state.spec.categorical()
    if cat is None:
        return set()
    return {
        str(row[cat.name])
        for idx, row, series in state.visible_rows()
        if idx in rows and series is None and cat.name in row
    }


def _full_time_span(state: ChartState) -> tuple[int, int] | None:
    t_attr = state.spec.temporal()
    if t_attr is None:
        return None
    ordinals = []
    for row in state.spec.rows:
        if t_attr.name in row:
            lo, hi = temporal_period(str(row[t_attr.name]))
            ordinals.extend((lo, hi))
    if not ordinals:
        return None
    return min(ordinals), max(ordinals)


def _stamp_like(ordinal: int, like: str) -> str:
    d = date.fromordinal(ordinal)
    if re.fullmatch(r"\d{4}", like):
        return f"{d.year:04d}"
    if re.fullmatch(r"\d{4}Q[1-4]", like):
        return f"{d.year:04d}Q{(d.month - 1) // 3 + 1}"
    return d.isoformat()


def _fit_rescale(ctx: _Ctx, *, pad_window: bool = False) -> Rescale:
    """A rescale matching the shadow state's visible extent.

    With pad_window, a time window much narrower than the whole series
    keeps some surrounding context on the axis.
    """
    x_extent, y_extent = data_extent(ctx.state)
    if pad_window and x_extent is not None:
        span = _full_time_span(ctx.state)
        lo = temporal_period(x_extent[0])[0]
        hi = temporal_period(x_extent[1])[1]
        if span is not None and span[1] > span[0]:
            full = span[1] - span[0]
            if (hi - lo) / full < ctx.policy.narrow_window:
                pad = max(1, round(ctx.policy.context_padding * full))
                x_extent = (
                    _stamp_like(max(span[0], lo - pad), x_extent[0]),
                    _stamp_like(min(span[1], hi + pad), x_extent[1]),
                )
    return Rescale(x_domain=x_extent, y_domain=y_extent)


def _category_scope(split: dict[str, list[Filter]], ctx: _Ctx) -> frozenset[int]:
    """Rows the categorical clauses select, even when merely highlighted."""
    scope = ctx.state.visible
    for f in split["categorical"]:
        scope &= ctx.rows([f])
    return scope


def _plan_selection(split: dict[str, list[Filter]], ctx: _Ctx) -> None:
    """Filter-phase steps: emphasize or cut rows per filter clause."""
    for f in split["categorical"]:
        rows = ctx.rows([f])
        if not rows:
            raise EmptySelection(f"nothing matches {serialize_filter(f)}")
        if rows == ctx.state.visible:
            continue
        selected = _series_of_rows(ctx.state, rows)
        present = _visible_series(ctx.state)
        fraction = len(selected) / len(present) if present else 1.0
        if fraction <= ctx.policy.highlight_threshold:
            ctx.push(Highlight(rows=tuple(sorted(rows))))
        else:
            ctx.push(Reduce(keep_rows=tuple(sorted(rows))))
            ctx.push(_fit_rescale(ctx))
    for f in split["temporal"]:
        rows = ctx.rows([f])
        if not rows:
            raise EmptySelection(f"nothing matches {serialize_filter(f)}")
        if rows == ctx.state.visible:
            continue
        ctx.push(Reduce(keep_rows=tuple(sorted(rows))))
        ctx.push(_fit_rescale(ctx, pad_window=True))
    for f in split["quantitative"]:
        rows = ctx.scoped_rows(f, _category_scope(split, ctx))
        if not rows:
            raise EmptySelection(f"nothing matches {serialize_filter(f)}")
        if rows == ctx.state.visible:
            continue
        ctx.push(Reduce(keep_rows=tuple(sorted(rows))))
        ctx.push(_fit_rescale(ctx))


def _selection_rows(split: dict[str, list[Filter]], ctx: _Ctx) -> frozenset[int]:
    """Rows matching every selection clause, with scoped aggregates."""
    sel = ctx.state.visible
    for f in split["categorical"] + split["temporal"]:
        sel &= ctx.rows([f])
    for f in split["quantitative"]:
        sel &= ctx.scoped_rows(f, sel)
    return sel


def _row_label(state: ChartState, idx: int) -> tuple[str | None, float | None, str]:
    """(x anchor, y anchor, series label) for one visible row."""
    spec = state.spec
    t_attr = spec.temporal()
    cat = spec.categorical()
    y_name = spec.encodings.y
    for i, row, series in state.visible_rows():
        if i != idx:
            continue
        x = None
        if t_attr is not None and t_attr.name in row:
            x = str(row[t_attr.name])
        elif cat is not None and cat.name in row:
            x = str(row[cat.name])
        v = row.get(y_name)
        y = float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else None
        label = series if series is not None else str(row.get(cat.name, y_name)) if cat else y_name
        return x, y, label
    raise EmptySelection(f"row {idx} is not visible")


def _point_note(ctx: _Ctx, idx: int, text: str, guideline: str | None = None) -> Annotate:
    x, y, _ = _row_label(ctx.state, idx)
    return Annotate(Annotation(text=text, x=x, y=y, guideline=guideline), phase="output")


def _column_values(
    ctx: _Ctx, ref: AttributeRef, rows: frozenset[int]
) -> list[tuple[int, float]]:
    """(row index, value) pairs of an attribute or derived series."""
    state = ctx.state
    derived = {d.name for d in state.derived if d.kind == "data"}
    out: list[tuple[int, float]] = []
    if ref.kind == "byName" and ref.name in derived:
        y_name = state.spec.encodings.y
        for idx, row, series in state.visible_rows():
            v = row.get(y_name)
            if idx in rows and series == ref.name and isinstance(v, (int, float)):
                out.append((idx, float(v)))
        return out
    res = resolve_attribute(ref, state.spec, use_synonyms=ctx.syn)
    if res.kind != "attribute" or res.attribute.type != "quantitative":
        raise TypeMismatch(f"{ref.name!r} is not a quantitative attribute")
    col = res.attribute.name
    for idx, row, series in state.visible_rows():
        v = row.get(col)
        if idx in rows and series is None and isinstance(v, (int, float)):
            out.append((idx, float(v)))
    return out


def _display_name(ref: AttributeRef, ctx: _Ctx) -> str:
    kind, name = operand_kind(ref, ctx.state, use_synonyms=ctx.syn)
    _ = kind
    return name


def _unique_name(base: str, state: ChartState) -> str:
    taken = {d.name for d in state.derived}
    cat = state.spec.categorical()
    taken |= {c.casefold() for c in cat.choices} if cat else set()
    name, n = base, 1
    while name in taken or name.casefold() in taken:
        n += 1
        name = f"{base} #{n}"
    return name


def _single_period_visible(ctx: _Ctx) -> bool:
    t_attr = ctx.state.spec.temporal()
    if t_attr is None:
        return False
    stamps = {
        str(row[t_attr.name])
        for _, row, series in ctx.state.visible_rows()
        if series is None and t_attr.name in row
    }
    return len(stamps) == 1


def _wanted_ranks(f: Filter) -> set[int] | None:
    try:
        k = int(float(f.value.text))  # type: ignore[union-attr]
    except (AttributeError, ValueError):
        return None
    if f.op is FilterOp.LT:
        # Count filters name how many leaders to keep: ranks 1 through k.
        return set(range(1, k + 1))
    if f.op is FilterOp.EQ:
        return {k}
    return None


def _plan_rank(task: Task, f: Filter, ctx: _Ctx) -> None:
    if ctx.state.spec.categorical() is None:
        raise UnplannableTask("ranking needs a categorical attribute")
    if _single_period_visible(ctx) and ctx.state.mark in ("line", "area"):
        ctx.push(Reencode("bar"))
    dspec = task.derive
    if dspec is None or dspec.kind != "rank":
        dspec = DeriveSpec(
            kind="rank",
            operands=(AttributeRef.by_name(ctx.state.spec.encodings.y),),
            direction=f.direction if f.direction is not Direction.NONE else Direction.TOP,
        )
    operand = dspec.operands[0].name if dspec.operands else ctx.state.spec.encodings.y
    ctx.push(Derive(spec=dspec, name=_unique_name(f"{operand} rank", ctx.state)))
    ranks = {str(r["category"]): int(r["rank"]) for r in ctx.state.derived[-1].rows}
    wanted = _wanted_ranks(f)
    cats = {c for c, r in ranks.items() if wanted is None or r in wanted}
    if not cats:
        raise EmptySelection("no category falls in the requested ranks")
    cat = ctx.state.spec.categorical()
    assert cat is not None
    rows = tuple(
        sorted(
            idx
            for idx, row, series in ctx.state.visible_rows()
            if series is None and str(row.get(cat.name)) in cats
        )
    )
    ctx.push(Highlight(rows=rows, phase="output"))


def _plan_identify(task: Task, ctx: _Ctx) -> None:
    split = _split_filters(task.filters, ctx.state, ctx.syn)
    _plan_selection(split, ctx)
    if split["rank"]:
        _plan_rank(task, split["rank"][0], ctx)
        return
    target_temporal = False
    if task.target is not None and task.target.kind == "byName":
        try:
            res = resolve_attribute(task.target, ctx.state.spec, use_synonyms=ctx.syn)
            target_temporal = res.kind == "attribute" and res.attribute.type == "temporal"
        except Exception:
            target_temporal = False
    if split["extreme"]:
        scope = _selection_rows(split, ctx)
        if not scope:
            raise EmptySelection("the filters select nothing together")
        for f in split["extreme"]:
            rows = ctx.scoped_rows(f, scope) & scope
            if not rows:
                raise EmptySelection(f"nothing matches {serialize_filter(f)}")
            assert isinstance(f.value, AggregateValue)
            op = f.value.spec.op
            label = f.value.spec.attribute.name or ctx.state.spec.encodings.y
            guideline = "vertical" if target_temporal else None
            for idx in sorted(rows):
                _, y, _ = _row_label(ctx.state, idx)
                text = f"{op} {label}: {_fmt_num(y)}" if y is not None else f"{op} {label}"
                ctx.push(_point_note(ctx, idx, text, guideline))
        return
    if not (split["categorical"] or split["temporal"] or split["quantitative"]):
        return
    rows = _selection_rows(split, ctx)
    if not rows:
        raise EmptySelection("the filters select nothing together")
    if len(rows) <= ctx.policy.annotation_cap:
        for idx in sorted(rows):
            x, y, label = _row_label(ctx.state, idx)
            if target_temporal and x is not None:
                ctx.push(_point_note(ctx, idx, f"{label}: {x}", "vertical"))
            elif y is not None:
                ctx.push(_point_note(ctx, idx, f"{label}: {_fmt_num(y)}"))
    elif rows != ctx.state.visible:
        ctx.push(Highlight(rows=tuple(sorted(rows)), phase="output"))


def _plan_aggregate(task: Task, ctx: _Ctx) -> None:
    agg: Filter | None = None
    rest: list[Filter] = []
    for f in task.filters:
        if agg is None and f.op is FilterOp.EQ and isinstance(f.value, AggregateValue):
            agg = f
        else:
            rest.append(f)
    split = _split_filters(rest, ctx.state, ctx.syn)
    _plan_selection(split, ctx)
    if agg is None:
        return
    rows = _selection_rows(split, ctx)
    if not rows:
        raise EmptySelection("the filters select nothing together")
    pairs = _column_values(ctx, agg.value.spec.attribute, rows)
    if not pairs:
        raise EmptySelection("nothing to aggregate over")
    values = [v for _, v in pairs]
    op = agg.value.spec.op
    label = agg.value.spec.attribute.name or ctx.state.spec.encodings.y
    if op == "avg":
        value = sum(values) / len(values)
        note = Annotation(
            text=f"avg {label}: {_fmt_num(value)}", y=value, guideline="horizontal"
        )
        ctx.push(Annotate(note, phase="output"))
    elif op in ("max", "min"):
        value = max(values) if op == "max" else min(values)
        idx = min(i for i, v in pairs if v == value)
        ctx.push(_point_note(ctx, idx, f"{op} {label}: {_fmt_num(value)}"))
    else:
        value = sum(values)
        note = Annotation(text=f"sum {label}: {_fmt_num(value)}")
        ctx.push(Annotate(note, phase="output"))


def _plan_trend(task: Task, ctx: _Ctx) -> None:
    if ctx.state.spec.temporal() is None:
        raise UnplannableTask("trend needs a time axis")
    split = _split_filters(task.filters, ctx.state, ctx.syn)
    _plan_selection(split, ctx)
    derived = {d.name for d in ctx.state.derived if d.kind == "data"}
    if task.target is not None and task.target.kind == "byName" and task.target.name in derived:
        rows = tuple(
            sorted(
                idx
                for idx, _, series in ctx.state.visible_rows()
                if series == task.target.name
            )
        )
        if rows:
            ctx.push(Highlight(rows=rows, phase="output"))
        return
    if split["categorical"]:
        return
    series = _visible_series(ctx.state)
    if len(series) >= 3 and not ctx.state.stacked and ctx.state.mark in ("line", "area", "bar"):
        if ctx.state.mark == "line":
            ctx.push(Reencode("area"))
        ctx.push(Rearrange("stack"))


def _operand_rows(ctx: _Ctx, names: set[str]) -> tuple[int, ...]:
    cat = ctx.state.spec.categorical()
    folded = {n.casefold() for n in names}
    out = []
    for idx, row, series in ctx.state.visible_rows():
        if series is not None and series in names:
            out.append(idx)
        elif series is None and cat is not None:
            if str(row.get(cat.name, "")).casefold() in folded:
                out.append(idx)
    return tuple(sorted(out))


def _derived_rows(ctx: _Ctx, name: str) -> tuple[int, ...]:
    return tuple(
        sorted(idx for idx, _, series in ctx.state.visible_rows() if series == name)
    )


def _push_combine(task: Task, ctx: _Ctx) -> None:
    assert task.derive is not None
    names = [_display_name(o, ctx) for o in task.derive.operands]
    base = (
        f"difference of {names[0]} and {names[1]}"
        if task.derive.kind == "difference"
        else "combined " + (", ".join(names[:-1]) + f" and {names[-1]}" if len(names) > 1 else names[0])
    )
    name = _unique_name(base, ctx.state)
    ctx.push(Derive(spec=task.derive, name=name))
    ctx.push(Highlight(rows=_derived_rows(ctx, name), phase="output"))


def _plan_sum(task: Task, ctx: _Ctx) -> None:
    if task.derive is None or not task.derive.operands:
        raise UnplannableTask("a sum task names the series or attributes to add")
    split = _split_filters(task.filters, ctx.state, ctx.syn)
    _plan_selection(split, ctx)
    resolved = [operand_kind(o, ctx.state, use_synonyms=ctx.syn) for o in task.derive.operands]
    kinds = {k for k, _ in resolved}
    if kinds == {"column"}:
        _push_combine(task, ctx)
        return
    if "column" in kinds:
        raise UnplannableTask("cannot add series to attributes")
    names = {n for _, n in resolved}
    if len(names) >= 3 and ctx.state.mark in ("line", "area"):
        # A stacked composite reads as the running total of its parts.
        rows = _operand_rows(ctx, names)
        if not rows:
            raise EmptySelection("the named series have no visible data")
        if frozenset(rows) != ctx.state.visible:
            ctx.push(Reduce(keep_rows=rows, phase="derivation"))
            fit = _fit_rescale(ctx)
            ctx.push(Rescale(fit.x_domain, fit.y_domain, phase="derivation"))
        if ctx.state.mark == "line":
            ctx.push(Reencode("area"))
        if not ctx.state.stacked:
            ctx.push(Rearrange("stack"))
        return
    _push_combine(task, ctx)


def _plan_compare(task: Task, ctx: _Ctx) -> None:
    if not task.subtasks:
        _plan_identify(task, ctx)
        return
    shared: list[Filter] = list(task.filters)
    per_sub: list[list[Filter]] = []
    for sub in task.subtasks:
        mine: list[Filter] = []
        for f in sub.filters:
            if _filter_class(f, ctx.state, ctx.syn) == "categorical":
                mine.append(f)
            elif f not in shared:
                shared.append(f)
        per_sub.append(mine)
    _plan_selection(_split_filters(shared, ctx.state, ctx.syn), ctx)
    union: set[int] = set()
    rows_by_sub: list[list[int]] = []
    for sub, mine in zip(task.subtasks, per_sub):
        _ = mine
        rows = ctx.rows(sub.filters)
        if not rows:
            raise EmptySelection("one side of the comparison selects nothing")
        union |= rows
        rows_by_sub.append(sorted(rows))
    if frozenset(union) != ctx.state.visible:
        ctx.push(Highlight(rows=tuple(sorted(union))))
    if ctx.state.mark == "bar" and not ctx.state.aligned and len(task.subtasks) > 1:
        ctx.push(Rearrange("align"))
    if task.derive is not None:
        _push_combine(task, ctx)
    if all(len(rows) <= 2 for rows in rows_by_sub):
        for rows in rows_by_sub:
            for idx in rows:
                x, y, label = _row_label(ctx.state, idx)
                _ = x
                if y is not None:
                    ctx.push(_point_note(ctx, idx, f"{label}: {_fmt_num(y)}"))


def plan(
    task: Task,
    state: ChartState,
    policy: PlanPolicy | None = None,
    *,
    use_synonyms: bool = True,
) -> list[ManipStep]:
    """Compile a task into ordered manipulation steps for this chart.

    Raises UnplannableTask when the chart lacks what the task needs,
    EmptySelection when a filter selects nothing, and reference errors
    when a name cannot be resolved.  The returned steps always apply
    cleanly to the given state in order.
    """
    bound = resolve_channel_refs(task, state.spec)
    ctx = _Ctx(state, policy or PlanPolicy(), use_synonyms)
    if bound.kind is TaskKind.IDENTIFY:
        _plan_identify(bound, ctx)
    elif bound.kind is TaskKind.COMPARE:
        _plan_compare(bound, ctx)
    elif bound.kind is TaskKind.AGGREGATE:
        _plan_aggregate(bound, ctx)
    elif bound.kind is TaskKind.TREND:
        _plan_trend(bound, ctx)
    elif bound.kind is TaskKind.SUM:
        _plan_sum(bound, ctx)
    else:
        raise UnplannableTask(f"no planning rule for task kind {bound.kind.value!r}")
    order = [PHASES.index(s.phase) for s in ctx.steps]
    assert order == sorted(order), "plan phases out of order"
    return ctx.steps
