"""Query templates and their gold tasks.

Every template renders a natural-language question plus the task it
must translate to.  The renderer and the rule translator share the same
conventions (time tokens, rank wording, threshold wording), so a
generated pair always closes the loop: translate(query) == gold.

Referent slots control how a series is named in the surface text:
by its choice name, by its bound color ("the green line"), or by the
mixed form ("the green coal line").
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from chartquery.chart.model import ChartSpec
from chartquery.datagen.combos import Combo
from chartquery.datagen.vocabload import Domain
from chartquery.translate.lexicon import pluralize
from chartquery.taskir import (
    AggregateSpec,
    AggregateValue,
    AttributeRef,
    Channel,
    DeriveSpec,
    Direction,
    Filter,
    FilterOp,
    ListValue,
    Literal,
    RangeValue,
    Task,
    TaskKind,
)

# slot kind -> surface styles the slot may use
SLOT_STYLES = {
    "listed": ("byName",),
    "single": ("byName", "byChannel"),
    "operand": ("byName", "byChannel"),
    "operand0": ("byName", "byChannel", "mixed"),
}


@dataclass(frozen=True)
class SpecCtx:
    """Everything a template needs to know about one chart."""

    domain: Domain
    combo: Combo
    spec: ChartSpec
    cat: str
    choices: tuple[str, ...]
    colors: dict[str, str]
    quants: tuple[str, ...]
    stamps: tuple[str, ...]

    @property
    def q(self) -> str:
        return self.quants[0]

    @property
    def noun(self) -> str:
        return self.combo.mark


@dataclass(frozen=True)
class Template:
    name: str
    category: str
    weight: float
    slots: tuple[str, ...]
    chart: str  # temporal | snapshot | any | twoquant
    realize: Callable[[SpecCtx, random.Random, tuple[str, ...]], tuple[str, Task]]


def _surface_ref(ctx: SpecCtx, choice: str, style: str) -> str:
    if style == "byName":
        return choice
    color = ctx.colors[choice]
    if style == "byChannel":
        return f"the {color} {ctx.noun}"
    return f"the {color} {choice} {ctx.noun}"


def _ref_filter(ctx: SpecCtx, choice: str, style: str) -> Filter:
    if style == "byChannel":
        color = ctx.colors[choice]
        return Filter(
            AttributeRef.by_channel(Channel.COLOR, color), FilterOp.EQ, Literal(color)
        )
    return Filter(AttributeRef.by_name(ctx.cat), FilterOp.EQ, Literal(choice))


def _operand(ctx: SpecCtx, choice: str, style: str) -> AttributeRef:
    if style == "byChannel":
        return AttributeRef.by_channel(Channel.COLOR, ctx.colors[choice])
    if style == "mixed":
        return AttributeRef.mixed(choice, Channel.COLOR, ctx.colors[choice])
    return AttributeRef.by_name(choice)


def _time_eq(stamp: str) -> Filter:
    return Filter(AttributeRef.by_name("time"), FilterOp.EQ, Literal(stamp))


def _time_range(lo: str, hi: str) -> Filter:
    return Filter(
        AttributeRef.by_name("time"),
        FilterOp.IN_RANGE,
        RangeValue(Literal(lo), Literal(hi)),
    )


def _extreme(q: str, op: str) -> Filter:
    agg = AggregateValue(AggregateSpec(op, AttributeRef.by_name(q)))
    return Filter(AttributeRef.by_name(q), FilterOp.EQ, agg)


def _avg_threshold(q: str, op: FilterOp) -> Filter:
    agg = AggregateValue(AggregateSpec("avg", AttributeRef.by_name(q)))
    return Filter(AttributeRef.by_name(q), op, agg)


def _pick_stamp(ctx: SpecCtx, rng: random.Random) -> str:
    return rng.choice(ctx.stamps)


def _pick_window(ctx: SpecCtx, rng: random.Random) -> tuple[str, str]:
    i = rng.randrange(0, len(ctx.stamps) - 2)
    j = rng.randrange(i + 2, len(ctx.stamps))
    return ctx.stamps[i], ctx.stamps[j]


def _at_phrase(ctx: SpecCtx, stamp: str, rng: random.Random) -> str:
    prep = "on" if ctx.combo.granularity == "date" else "in"
    if ctx.combo.granularity == "quarter" and rng.random() < 0.2:
        return f"{prep} Q{stamp[5]} {stamp[:4]}"
    return f"{prep} {stamp}"


def _window_phrase(lo: str, hi: str, rng: random.Random) -> str:
    if rng.random() < 0.5:
        return f"from {lo} to {hi}"
    return f"between {lo} and {hi}"


def _granword(ctx: SpecCtx) -> str:
    return {"year": "year", "quarter": "quarter", "date": "date"}[
        ctx.combo.granularity or "year"
    ]


_MAX_ADJ = ("highest", "largest", "greatest")
_MIN_ADJ = ("lowest", "smallest")


def _superlative(rng: random.Random) -> tuple[str, str]:
    if rng.random() < 0.72:
        return rng.choice(_MAX_ADJ), "max"
    return rng.choice(_MIN_ADJ), "min"


def _column_values(ctx: SpecCtx) -> list[float]:
    return [float(r[ctx.q]) for r in ctx.spec.rows]


def _identify(target: str | None, filters, derive=None) -> Task:
    ref = AttributeRef.by_name(target) if target else None
    return Task(TaskKind.IDENTIFY, ref, tuple(filters), derive)


# --- identification -------------------------------------------------

def _t_value_at(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    text = rng.choice(
        [
            f"What was the {ctx.q} of {ref} {at}?",
            f"What is the {ctx.q} for {ref} {at}?",
            f"How much {ctx.q} did {ref} have {at}?",
        ]
    )
    task = _identify(ctx.q, [_ref_filter(ctx, choice, styles[0]), _time_eq(stamp)])
    return text, task


def _t_value(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    text = rng.choice(
        [
            f"What is the {ctx.q} of {ref}?",
            f"How much {ctx.q} does {ref} have?",
        ]
    )
    return text, _identify(ctx.q, [_ref_filter(ctx, choice, styles[0])])


def _t_extreme(ctx, rng, styles):
    adj, op = _superlative(rng)
    text = f"Which {ctx.cat} has the {adj} {ctx.q}?"
    return text, _identify(ctx.cat, [_extreme(ctx.q, op)])


def _t_extreme_at(ctx, rng, styles):
    adj, op = _superlative(rng)
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    text = f"Which {ctx.cat} had the {adj} {ctx.q} {at}?"
    return text, _identify(ctx.cat, [_extreme(ctx.q, op), _time_eq(stamp)])


def _t_extreme_range(ctx, rng, styles):
    adj, op = _superlative(rng)
    lo, hi = _pick_window(ctx, rng)
    text = f"Which {ctx.cat} had the {adj} {ctx.q} {_window_phrase(lo, hi, rng)}?"
    return text, _identify(ctx.cat, [_extreme(ctx.q, op), _time_range(lo, hi)])


def _among_task(ctx, picks, op, extra) -> Task:
    items = ListValue(tuple(Literal(c) for c in picks))
    listed = Filter(AttributeRef.by_name(ctx.cat), FilterOp.EQ, items)
    return _identify(ctx.cat, [listed, _extreme(ctx.q, op), extra])


def _t_among_at(ctx, rng, styles):
    picks = rng.sample(ctx.choices, 3)
    adj, op = _superlative(rng)
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    opener = rng.choice(["Among", "Of"])
    text = (
        f"{opener} {picks[0]}, {picks[1]} and {picks[2]}, "
        f"which {ctx.cat} had the {adj} {ctx.q} {at}?"
    )
    return text, _among_task(ctx, picks, op, _time_eq(stamp))


def _t_among_range(ctx, rng, styles):
    picks = rng.sample(ctx.choices, 3)
    adj, op = _superlative(rng)
    lo, hi = _pick_window(ctx, rng)
    text = (
        f"Among {picks[0]}, {picks[1]} and {picks[2]}, "
        f"which {ctx.cat} had the {adj} {ctx.q} {_window_phrase(lo, hi, rng)}?"
    )
    return text, _among_task(ctx, picks, op, _time_range(lo, hi))


def _t_when_extreme(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    adj, op = _superlative(rng)
    if op == "max" and rng.random() < 0.4:
        text = f"When did {ref} reach its peak {ctx.q}?"
        op = "max"
    else:
        text = f"In which {_granword(ctx)} did {ref} have the {adj} {ctx.q}?"
    task = _identify("time", [_ref_filter(ctx, choice, styles[0]), _extreme(ctx.q, op)])
    return text, task


def _t_when_extreme_range(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    adj, op = _superlative(rng)
    lo, hi = _pick_window(ctx, rng)
    text = (
        f"In which {_granword(ctx)} did {ref} have the {adj} {ctx.q} "
        f"{_window_phrase(lo, hi, rng)}?"
    )
    task = _identify(
        "time",
        [_ref_filter(ctx, choice, styles[0]), _extreme(ctx.q, op), _time_range(lo, hi)],
    )
    return text, task


def _t_above_avg_window(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    lo, hi = _pick_window(ctx, rng)
    word, op = rng.choice([("above", FilterOp.GT), ("below", FilterOp.LT)])
    text = (
        f"In which {_granword(ctx)}s did {ref} stay {word} the average {ctx.q} "
        f"{_window_phrase(lo, hi, rng)}?"
    )
    task = _identify(
        "time",
        [
            _ref_filter(ctx, choice, styles[0]),
            _avg_threshold(ctx.q, op),
            _time_range(lo, hi),
        ],
    )
    return text, task


def _t_threshold_at(ctx, rng, styles):
    values = _column_values(ctx)
    n = int(rng.uniform(min(values), max(values)))
    word, op = rng.choice(
        [("above", FilterOp.GT), ("over", FilterOp.GT), ("below", FilterOp.LT)]
    )
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    text = f"Which {pluralize(ctx.cat)} had {ctx.q} {word} {n} {at}?"
    threshold = Filter(AttributeRef.by_name(ctx.q), op, Literal(str(n)))
    return text, _identify(ctx.cat, [threshold, _time_eq(stamp)])


def _rank_task(ctx, k: int, op: FilterOp, direction: Direction, extra=None) -> Task:
    rank = Filter(AttributeRef.by_name("rank"), op, Literal(str(k)), direction)
    filters = [rank] if extra is None else [rank, extra]
    derive = DeriveSpec("rank", (AttributeRef.by_name(ctx.q),), direction)
    return _identify(ctx.cat, filters, derive)


_COUNT_WORDS = {2: "two", 3: "three", 4: "four", 5: "five"}


def _t_topk(ctx, rng, styles):
    k = rng.randint(2, min(4, len(ctx.choices) - 1))
    kw = str(k) if rng.random() < 0.7 else _COUNT_WORDS[k]
    side = rng.choice(["top", "bottom"])
    direction = Direction.TOP if side == "top" else Direction.BOTTOM
    text = f"What are the {side} {kw} {pluralize(ctx.cat)} by {ctx.q}?"
    return text, _rank_task(ctx, k, FilterOp.LT, direction)


def _t_topk_at(ctx, rng, styles):
    k = rng.randint(2, min(4, len(ctx.choices) - 1))
    kw = str(k) if rng.random() < 0.7 else _COUNT_WORDS[k]
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    side = rng.choice(["top", "bottom"])
    direction = Direction.TOP if side == "top" else Direction.BOTTOM
    text = f"What were the {side} {kw} {pluralize(ctx.cat)} by {ctx.q} {at}?"
    return text, _rank_task(ctx, k, FilterOp.LT, direction, _time_eq(stamp))


_ORDINALS = {2: "second", 3: "third", 4: "fourth"}


def _t_ordinal_at(ctx, rng, styles):
    n = rng.randint(2, min(4, len(ctx.choices) - 1))
    adj, _ = _superlative(rng)
    direction = Direction.TOP if adj in _MAX_ADJ else Direction.BOTTOM
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    text = f"Which {ctx.cat} had the {_ORDINALS[n]} {adj} {ctx.q} {at}?"
    return text, _rank_task(ctx, n, FilterOp.EQ, direction, _time_eq(stamp))


# --- comparison -----------------------------------------------------

def _compare_task(ctx, picks, styles, time_filter=None) -> Task:
    target = AttributeRef.by_name(ctx.q)
    subtasks = []
    for choice, style in zip(picks, styles):
        own = [_ref_filter(ctx, choice, "byName" if style == "mixed" else style)]
        if time_filter is not None:
            own.append(time_filter)
        subtasks.append(Task(TaskKind.IDENTIFY, target, tuple(own)))
    operands = tuple(_operand(ctx, c, s) for c, s in zip(picks, styles))
    return Task(
        TaskKind.COMPARE,
        target,
        (),
        DeriveSpec("difference", operands),
        tuple(subtasks),
    )


def _comp_text(ctx, rng, refs: tuple[str, str], tail: str) -> str:
    head = rng.choice(
        [
            f"What is the difference in {ctx.q} between",
            f"What was the gap in {ctx.q} between",
            f"How does {ctx.q} compare between",
        ]
    )
    return f"{head} {refs[0]} and {refs[1]}{tail}?"


def _t_comp_at(ctx, rng, styles):
    picks = rng.sample(ctx.choices, 2)
    refs = tuple(_surface_ref(ctx, c, s) for c, s in zip(picks, styles))
    stamp = _pick_stamp(ctx, rng)
    text = _comp_text(ctx, rng, refs, f" {_at_phrase(ctx, stamp, rng)}")
    return text, _compare_task(ctx, picks, styles, _time_eq(stamp))


def _t_comp_range(ctx, rng, styles):
    picks = rng.sample(ctx.choices, 2)
    refs = tuple(_surface_ref(ctx, c, s) for c, s in zip(picks, styles))
    lo, hi = _pick_window(ctx, rng)
    text = _comp_text(ctx, rng, refs, f" {_window_phrase(lo, hi, rng)}")
    return text, _compare_task(ctx, picks, styles, _time_range(lo, hi))


def _t_comp(ctx, rng, styles):
    picks = rng.sample(ctx.choices, 2)
    refs = tuple(_surface_ref(ctx, c, s) for c, s in zip(picks, styles))
    text = _comp_text(ctx, rng, refs, "")
    return text, _compare_task(ctx, picks, styles)


# --- aggregation ----------------------------------------------------

def _agg_filter(q: str, op: str) -> Filter:
    agg = AggregateValue(AggregateSpec(op, AttributeRef.by_name(q)))
    return Filter(AttributeRef.by_name(q), FilterOp.EQ, agg)


def _agg_task(ctx, filters) -> Task:
    return Task(TaskKind.AGGREGATE, AttributeRef.by_name(ctx.q), tuple(filters))


def _t_agg_at_ref(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    word = rng.choice(["average", "mean"])
    text = f"What was the {word} {ctx.q} of {ref} {at}?"
    task = _agg_task(
        ctx, [_agg_filter(ctx.q, "avg"), _ref_filter(ctx, choice, styles[0]), _time_eq(stamp)]
    )
    return text, task


def _t_agg_at(ctx, rng, styles):
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    text = f"What was the average {ctx.q} across all {pluralize(ctx.cat)} {at}?"
    return text, _agg_task(ctx, [_agg_filter(ctx.q, "avg"), _time_eq(stamp)])


def _t_agg_window(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    lo, hi = _pick_window(ctx, rng)
    word = rng.choice(["average", "mean"])
    text = f"What was the {word} {ctx.q} of {ref} {_window_phrase(lo, hi, rng)}?"
    task = _agg_task(
        ctx,
        [_agg_filter(ctx.q, "avg"), _ref_filter(ctx, choice, styles[0]), _time_range(lo, hi)],
    )
    return text, task


def _t_agg_extreme(ctx, rng, styles):
    adj, op = _superlative(rng)
    text = f"What is the {adj} {ctx.q}?"
    return text, _agg_task(ctx, [_agg_filter(ctx.q, op)])


def _t_agg_extreme_at(ctx, rng, styles):
    adj, op = _superlative(rng)
    stamp = _pick_stamp(ctx, rng)
    at = _at_phrase(ctx, stamp, rng)
    text = f"What was the {adj} {ctx.q} {at}?"
    return text, _agg_task(ctx, [_agg_filter(ctx.q, op), _time_eq(stamp)])


# --- derivation (trend and summation) -------------------------------

def _t_trend_ref(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    text = rng.choice(
        [
            f"What is the trend of {ctx.q} for {ref}?",
            f"How did the {ctx.q} of {ref} change over time?",
        ]
    )
    task = Task(
        TaskKind.TREND,
        AttributeRef.by_name(ctx.q),
        (_ref_filter(ctx, choice, styles[0]),),
    )
    return text, task


def _t_trend_ref_range(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    ref = _surface_ref(ctx, choice, styles[0])
    lo, hi = _pick_window(ctx, rng)
    text = f"What was the trend of {ctx.q} for {ref} {_window_phrase(lo, hi, rng)}?"
    task = Task(
        TaskKind.TREND,
        AttributeRef.by_name(ctx.q),
        (_ref_filter(ctx, choice, styles[0]), _time_range(lo, hi)),
    )
    return text, task


def _t_trend_bare(ctx, rng, styles):
    if rng.random() < 0.5:
        text = f"What is the overall trend for all {pluralize(ctx.cat)}?"
        return text, Task(TaskKind.TREND, None, ())
    text = f"How did {ctx.q} evolve over the {_granword(ctx)}s?"
    return text, Task(TaskKind.TREND, AttributeRef.by_name(ctx.q), ())


def _sum_task(ctx, picks, styles, filters) -> Task:
    operands = tuple(_operand(ctx, c, s) for c, s in zip(picks, styles))
    return Task(
        TaskKind.SUM,
        AttributeRef.by_name(ctx.q),
        tuple(filters),
        DeriveSpec("sum", operands),
    )


def _t_sum_two(ctx, rng, styles):
    picks = rng.sample(ctx.choices, 2)
    refs = tuple(_surface_ref(ctx, c, s) for c, s in zip(picks, styles))
    word = rng.choice(["combined", "total"])
    text = f"What is the {word} {ctx.q} of {refs[0]} and {refs[1]}?"
    return text, _sum_task(ctx, picks, styles, [])


def _t_sum_range(ctx, rng, styles):
    picks = rng.sample(ctx.choices, 2)
    refs = tuple(_surface_ref(ctx, c, s) for c, s in zip(picks, styles))
    lo, hi = _pick_window(ctx, rng)
    word = rng.choice(["combined", "total"])
    text = (
        f"What was the {word} {ctx.q} of {refs[0]} and {refs[1]} "
        f"{_window_phrase(lo, hi, rng)}?"
    )
    return text, _sum_task(ctx, picks, styles, [_time_range(lo, hi)])


def _t_sum_cqq(ctx, rng, styles):
    choice = rng.choice(ctx.choices)
    q1, q2 = ctx.quants[0], ctx.quants[1]
    text = rng.choice(
        [
            f"What is the total of {q1} and {q2} for {choice}?",
            f"What do {q1} and {q2} sum to for {choice}?",
        ]
    )
    operands = (AttributeRef.by_name(q1), AttributeRef.by_name(q2))
    task = Task(
        TaskKind.SUM,
        None,
        (Filter(AttributeRef.by_name(ctx.cat), FilterOp.EQ, Literal(choice)),),
        DeriveSpec("sum", operands),
    )
    return text, task


TEMPLATES: tuple[Template, ...] = (
    # identification
    Template("ident-value-at", "identification", 0.04, ("single",), "temporal", _t_value_at),
    Template("ident-value", "identification", 0.02, ("single",), "snapshot", _t_value),
    Template("ident-extreme", "identification", 0.02, (), "snapshot", _t_extreme),
    Template("ident-extreme-at", "identification", 0.06, (), "temporal", _t_extreme_at),
    Template("ident-extreme-range", "identification", 0.05, (), "temporal", _t_extreme_range),
    Template("ident-among-at", "identification", 0.22, ("listed",) * 3, "temporal", _t_among_at),
    Template("ident-among-range", "identification", 0.14, ("listed",) * 3, "temporal", _t_among_range),
    Template("ident-when-extreme", "identification", 0.05, ("single",), "temporal", _t_when_extreme),
    Template("ident-when-extreme-range", "identification", 0.16, ("single",), "temporal", _t_when_extreme_range),
    Template("ident-above-avg-window", "identification", 0.12, ("single",), "temporal", _t_above_avg_window),
    Template("ident-threshold-at", "identification", 0.04, (), "temporal", _t_threshold_at),
    Template("ident-topk", "identification", 0.02, (), "snapshot", _t_topk),
    Template("ident-topk-at", "identification", 0.03, (), "temporal", _t_topk_at),
    Template("ident-ordinal-at", "identification", 0.03, (), "temporal", _t_ordinal_at),
    # comparison
    Template("comp-diff-at", "comparison", 0.60, ("operand0", "operand"), "temporal", _t_comp_at),
    Template("comp-diff-range", "comparison", 0.35, ("operand0", "operand"), "temporal", _t_comp_range),
    Template("comp-diff", "comparison", 0.05, ("operand0", "operand"), "snapshot", _t_comp),
    # aggregation
    Template("agg-at-ref", "aggregation", 0.35, ("single",), "temporal", _t_agg_at_ref),
    Template("agg-at", "aggregation", 0.15, (), "temporal", _t_agg_at),
    Template("agg-window", "aggregation", 0.35, ("single",), "temporal", _t_agg_window),
    Template("agg-extreme", "aggregation", 0.05, (), "snapshot", _t_agg_extreme),
    Template("agg-extreme-at", "aggregation", 0.10, (), "temporal", _t_agg_extreme_at),
    # derivation
    Template("trend-ref", "derivation", 0.15, ("single",), "temporal", _t_trend_ref),
    Template("trend-ref-range", "derivation", 0.35, ("single",), "temporal", _t_trend_ref_range),
    Template("trend-bare", "derivation", 0.05, (), "temporal", _t_trend_bare),
    Template("sum-two", "derivation", 0.10, ("operand0", "operand"), "temporal", _t_sum_two),
    Template("sum-range", "derivation", 0.25, ("operand0", "operand"), "temporal", _t_sum_range),
    Template("sum-cqq", "derivation", 0.10, ("listed",), "twoquant", _t_sum_cqq),
)
