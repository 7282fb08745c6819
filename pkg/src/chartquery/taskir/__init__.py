"""Structured representation of chart analysis tasks.

A task captures what a query asks for: the kind of analysis, the output
attribute, the filters that narrow the data, an optional derivation, and
nested subtasks for comparisons.  Tasks have a canonical text form (see
`grammar`) and a JSON mirror (see `jsonio`).
"""

from .types import (
    AGG_OPS,
    CHANNELS,
    AggregateSpec,
    AggregateValue,
    AttributeRef,
    Channel,
    DeriveKind,
    DeriveSpec,
    Direction,
    Filter,
    FilterOp,
    ListValue,
    Literal,
    RangeValue,
    Task,
    TaskCategory,
    TaskKind,
    classify_literal,
    grammar_safe,
    task_category,
    validate,
)
from .grammar import canonicalize, parse_task_text, serialize_task
from .equality import literally_equal, semantically_equal
from .jsonio import task_from_json, task_to_json

__all__ = [
    "AGG_OPS",
    "CHANNELS",
    "AggregateSpec",
    "AggregateValue",
    "AttributeRef",
    "Channel",
    "DeriveKind",
    "DeriveSpec",
    "Direction",
    "Filter",
    "FilterOp",
    "ListValue",
    "Literal",
    "RangeValue",
    "Task",
    "TaskCategory",
    "TaskKind",
    "canonicalize",
    "classify_literal",
    "grammar_safe",
    "literally_equal",
    "parse_task_text",
    "semantically_equal",
    "serialize_task",
    "task_category",
    "task_from_json",
    "task_to_json",
    "validate",
]
