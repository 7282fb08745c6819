"""Seeded random generator for structurally valid tasks.

Every task built here satisfies ``validate(task) == []`` by construction,
so property tests can exercise serialization and JSON round-trips without
filtering. Determinism comes from the caller-supplied ``random.Random``.
"""

from __future__ import annotations

import random

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

ATTR_NAMES = (
    "consumption",
    "percentage",
    "revenue",
    "profit",
    "population",
    "sales",
    "share",
    "output",
    "emissions",
    "score",
)
DIM_NAMES = ("energy", "country", "industry", "sector", "region")
TIME_NAMES = ("time", "year")
CHOICES = (
    "coal",
    "gas",
    "solar",
    "wind",
    "oil",
    "India",
    "Canada",
    "Brazil",
    "Germany",
    "tech",
    "retail",
    "banking",
    "United States",
)
CHANNEL_VALUES = ("green", "blue", "red", "orange", "purple")


def random_name(rng: random.Random) -> str:
    return rng.choice(ATTR_NAMES + DIM_NAMES + TIME_NAMES)


def random_ref(rng: random.Random, allow_channel: bool = True) -> AttributeRef:
    roll = rng.random()
    if allow_channel and roll < 0.15:
        return AttributeRef.by_channel(Channel.COLOR, rng.choice(CHANNEL_VALUES))
    if allow_channel and roll < 0.25:
        return AttributeRef.mixed(
            rng.choice(DIM_NAMES), Channel.COLOR, rng.choice(CHANNEL_VALUES)
        )
    return AttributeRef.by_name(random_name(rng))


def random_literal(rng: random.Random) -> Literal:
    kind = rng.choice(("number", "number_f", "year", "quarter", "date", "text"))
    if kind == "number":
        return Literal(str(rng.randint(0, 1400)))
    if kind == "number_f":
        return Literal(f"{rng.uniform(0, 900):.1f}")
    if kind == "year":
        return Literal(str(rng.randint(1900, 2030)))
    if kind == "quarter":
        return Literal(f"{rng.randint(2000, 2024)}Q{rng.randint(1, 4)}")
    if kind == "date":
        return Literal(
            f"{rng.randint(2015, 2023)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"
        )
    return Literal(rng.choice(CHOICES))


def random_range(rng: random.Random) -> RangeValue:
    kind = rng.choice(("number", "year", "quarter", "date"))
    if kind == "number":
        a, b = sorted(rng.randint(0, 1400) for _ in range(2))
        lo, hi = Literal(str(a)), Literal(str(b))
    elif kind == "year":
        a, b = sorted(rng.randint(1900, 2030) for _ in range(2))
        lo, hi = Literal(str(a)), Literal(str(b))
    elif kind == "quarter":
        a, b = sorted((rng.randint(2000, 2024), rng.randint(1, 4)) for _ in range(2))
        lo, hi = Literal(f"{a[0]}Q{a[1]}"), Literal(f"{b[0]}Q{b[1]}")
    else:
        a, b = sorted(
            (rng.randint(2015, 2023), rng.randint(1, 12), rng.randint(1, 28))
            for _ in range(2)
        )
        lo = Literal(f"{a[0]}-{a[1]:02d}-{a[2]:02d}")
        hi = Literal(f"{b[0]}-{b[1]:02d}-{b[2]:02d}")
    return RangeValue(lo, hi)


def random_filter(rng: random.Random) -> Filter:
    roll = rng.random()
    if roll < 0.10:
        value = rng.choice(CHANNEL_VALUES)
        return Filter(
            AttributeRef.by_channel(Channel.COLOR, value), FilterOp.EQ, Literal(value)
        )
    if roll < 0.20:
        return Filter(
            AttributeRef.by_name(rng.choice(ATTR_NAMES)),
            FilterOp.IN_RANGE,
            random_range(rng),
        )
    if roll < 0.30:
        items = rng.sample(CHOICES, rng.randint(2, 4))
        return Filter(
            AttributeRef.by_name(rng.choice(DIM_NAMES)),
            FilterOp.EQ,
            ListValue(tuple(Literal(c) for c in items)),
        )
    if roll < 0.42:
        agg = AggregateValue(
            AggregateSpec(
                rng.choice(("max", "min", "avg", "sum")),
                random_ref(rng),
            )
        )
        return Filter(
            AttributeRef.by_name(rng.choice(ATTR_NAMES)),
            rng.choice((FilterOp.EQ, FilterOp.GT, FilterOp.LT)),
            agg,
        )
    if roll < 0.52:
        # rank-count shape: a directed threshold on an integer count
        return Filter(
            AttributeRef.by_name("rank"),
            rng.choice((FilterOp.EQ, FilterOp.LT)),
            Literal(str(rng.randint(1, 9))),
            rng.choice((Direction.TOP, Direction.BOTTOM)),
        )
    op = rng.choice((FilterOp.EQ, FilterOp.GT, FilterOp.LT))
    value = random_literal(rng)
    return Filter(AttributeRef.by_name(random_name(rng)), op, value)


def random_derive(rng: random.Random) -> DeriveSpec:
    kind = rng.choice(("difference", "sum", "rank", "trend", "growth"))
    if kind == "difference":
        ops = (random_ref(rng), random_ref(rng))
    elif kind == "sum":
        ops = tuple(random_ref(rng) for _ in range(rng.randint(2, 4)))
    else:
        ops = (random_ref(rng, allow_channel=False),)
    direction = Direction.NONE
    if kind == "rank":
        direction = rng.choice((Direction.TOP, Direction.BOTTOM, Direction.NONE))
    return DeriveSpec(kind, ops, direction)


def random_identify(rng: random.Random) -> Task:
    filters = tuple(random_filter(rng) for _ in range(rng.randint(0, 3)))
    target = random_ref(rng) if rng.random() < 0.8 else None
    derive = random_derive(rng) if rng.random() < 0.25 else None
    return Task(TaskKind.IDENTIFY, target, filters, derive)


def random_task(rng: random.Random) -> Task:
    kind = rng.choice(
        (
            TaskKind.IDENTIFY,
            TaskKind.IDENTIFY,
            TaskKind.COMPARE,
            TaskKind.AGGREGATE,
            TaskKind.TREND,
            TaskKind.SUM,
        )
    )
    if kind is TaskKind.COMPARE:
        subs = tuple(random_identify(rng) for _ in range(rng.randint(2, 3)))
        derive = None
        if rng.random() < 0.6:
            derive = DeriveSpec("difference", (random_ref(rng), random_ref(rng)))
        return Task(
            kind,
            random_ref(rng) if rng.random() < 0.6 else None,
            tuple(random_filter(rng) for _ in range(rng.randint(0, 1))),
            derive,
            subs,
        )
    task = random_identify(rng)
    return Task(kind, task.target, task.filters, task.derive)
