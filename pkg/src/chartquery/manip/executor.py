"""Applying manipulation steps to chart state, one keyframe per step."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..chart.model import MARKS, ChartState, temporal_period
from ..chart.resolve import resolve_attribute
from ..chart.svg import render_svg, stack_tops
from ..errors import PreconditionViolated
from ..taskir.types import AttributeRef
from .derive import compute_derive
from .steps import (
    Annotate,
    Derive,
    Highlight,
    ManipStep,
    Rearrange,
    Reduce,
    Reencode,
    Rescale,
    step_to_json,
)


@dataclass(frozen=True)
class Keyframe:
    index: int
    step: ManipStep | None
    state: ChartState
    svg: str


def _apply_highlight(step: Highlight, state: ChartState) -> ChartState:
    rows = frozenset(step.rows)
    if not rows <= state.visible:
        raise PreconditionViolated("highlight targets rows that are not visible")
    if step.intensity == "dim":
        marks = tuple((i, "dim") for i in sorted(rows))
    else:
        marks = tuple((i, "focus") for i in sorted(rows)) + tuple(
            (i, "dim") for i in sorted(state.visible - rows)
        )
    return replace(state, highlights=marks)


def _apply_rescale(step: Rescale, state: ChartState) -> ChartState:
    x, y = step.x_domain, step.y_domain
    if x is not None:
        if state.spec.temporal() is None:
            raise PreconditionViolated("x rescale needs a time axis")
        if temporal_period(x[0])[0] > temporal_period(x[1])[0]:
            raise PreconditionViolated(f"empty x domain {x[0]!r}..{x[1]!r}")
    if y is not None and y[0] > y[1]:
        raise PreconditionViolated(f"empty y domain {y[0]!r}..{y[1]!r}")
    return replace(
        state,
        x_domain=x if x is not None else state.x_domain,
        y_domain=y if y is not None else state.y_domain,
    )


def _apply_rearrange(step: Rearrange, state: ChartState) -> ChartState:
    if step.mode == "stack":
        if state.mark not in ("area", "bar"):
            raise PreconditionViolated(f"cannot stack {state.mark} marks")
        tops = stack_tops(state)
        top = max(tops.values(), default=0.0)
        lo = min(0.0, state.y_domain[0]) if state.y_domain else 0.0
        hi = max(top, state.y_domain[1]) if state.y_domain else top
        return replace(state, stacked=True, y_domain=(lo, hi))
    if step.mode == "align":
        return replace(state, aligned=True)
    if step.mode == "sort":
        if step.key is None:
            raise PreconditionViolated("sort needs a key")
        try:
            res = resolve_attribute(AttributeRef.by_name(step.key), state.spec)
        except Exception as exc:
            raise PreconditionViolated(f"unknown sort key {step.key!r}") from exc
        if res.kind != "attribute" or res.attribute.type != "quantitative":
            raise PreconditionViolated(f"sort key {step.key!r} is not quantitative")
        return replace(
            state, sort_key=res.attribute.name, sort_ascending=step.ascending
        )
    raise PreconditionViolated(f"unknown rearrange mode {step.mode!r}")


def _apply_derive(step: Derive, state: ChartState) -> ChartState:
    taken = {d.name for d in state.derived}
    cat = state.spec.categorical()
    choices = {c.casefold() for c in cat.choices} if cat else set()
    if step.name in taken or step.name.casefold() in choices:
        raise PreconditionViolated(f"series name {step.name!r} is already taken")
    series = compute_derive(step.spec, state, name=step.name)
    visible = state.visible
    y_domain = state.y_domain
    if series.kind == "data":
        start = len(state.spec.rows) + sum(
            len(d.rows) for d in state.derived if d.kind == "data"
        )
        visible = visible | frozenset(range(start, start + len(series.rows)))
        y_name = state.spec.encodings.y
        values = [
            float(r[y_name])
            for r in series.rows
            if isinstance(r.get(y_name), (int, float))
        ]
        if values and y_domain is not None:
            y_domain = (min(y_domain[0], min(values)), max(y_domain[1], max(values)))
        elif values:
            y_domain = (min(values), max(values))
    return replace(
        state, derived=state.derived + (series,), visible=visible, y_domain=y_domain
    )


def apply(step: ManipStep, state: ChartState, *, use_synonyms: bool = True) -> ChartState:
    """One step applied to one state, returning the next state.

    States are immutable; a PreconditionViolated (or a derivation error)
    leaves the input untouched.  highlight, annotate, rescale and
    rearrange never change row visibility or values.
    """
    if isinstance(step, Highlight):
        return _apply_highlight(step, state)
    if isinstance(step, Annotate):
        return replace(state, annotations=state.annotations + (step.annotation,))
    if isinstance(step, Rescale):
        return _apply_rescale(step, state)
    if isinstance(step, Rearrange):
        return _apply_rearrange(step, state)
    if isinstance(step, Reduce):
        keep = frozenset(step.keep_rows)
        if not keep <= state.visible:
            raise PreconditionViolated("reduce keeps rows that are not visible")
        return replace(state, visible=keep)
    if isinstance(step, Derive):
        _ = use_synonyms
        return _apply_derive(step, state)
    if isinstance(step, Reencode):
        if step.target_mark not in MARKS:
            raise PreconditionViolated(f"unknown mark {step.target_mark!r}")
        if step.target_mark == state.mark:
            raise PreconditionViolated(f"chart already uses {state.mark!r} marks")
        return replace(state, mark=step.target_mark)
    raise PreconditionViolated(f"not a manipulation step: {step!r}")


def apply_all(
    steps: list[ManipStep], state: ChartState, *, use_synonyms: bool = True
) -> list[Keyframe]:
    """Run a plan, returning a keyframe per step plus the opening frame.

    Keyframe 0 shows the untouched chart.  Errors propagate before any
    frame is handed back, so a failed plan yields nothing at all.
    """
    current = state
    pending = [Keyframe(0, None, state, render_svg(state))]
    for i, step in enumerate(steps, start=1):
        current = apply(step, current, use_synonyms=use_synonyms)
        pending.append(Keyframe(i, step, current, render_svg(current)))
    return pending


def keyframes_to_json(frames: list[Keyframe]) -> list[dict]:
    return [
        {
            "index": f.index,
            "step": step_to_json(f.step) if f.step is not None else None,
            "svg": f.svg,
        }
        for f in frames
    ]
