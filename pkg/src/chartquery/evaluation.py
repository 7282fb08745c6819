"""Scoring translator output against gold tasks.

Five scores per record, each 0 or 1 except the filter ratio:

* format: the raw output parses under the task grammar at all.
* literal: canonical serialized text matches the gold task exactly.
* semantic: equal once visual-channel references are resolved, so a
  query about "the green line" and one naming that series outright
  count as the same answer.
* task: the predicted action kind is the gold kind.
* filter: how many predicted filter clauses line up with gold ones.

The scores are monotone within a record: unparseable output zeroes
everything, literal equality forces semantic equality, and semantic
equality forces a correct kind and a perfect filter ratio.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass

from .chart.model import ChartSpec
from .chart.resolve import resolve_channel_refs
from .datagen.generate import Record
from .errors import ChartQueryError
from .taskir import (
    Task,
    TaskKind,
    literally_equal,
    parse_task_text,
    semantically_equal,
    serialize_task,
    task_category,
)
from .taskir.grammar import serialize_filter
from .taskir.types import Filter

METRICS = ("format", "literal", "semantic", "task", "filter")

Backend = Callable[[str, ChartSpec], str]


@dataclass(frozen=True)
class ScoredRecord:
    """One dataset record with its prediction and the five scores."""

    record: Record
    raw: str
    predicted: Task | None
    format: int
    literal: int
    semantic: int
    task: int
    filter: float


@dataclass(frozen=True)
class EvalReport:
    count: int
    means: dict[str, float]  # metric name -> mean * 100
    category_counts: dict[str, int]
    by_category: dict[str, dict[str, float]]
    records: tuple[ScoredRecord, ...]


def score_format(raw: str) -> int:
    try:
        parse_task_text(raw)
    except ChartQueryError:
        return 0
    return 1


def score_literal(pred: Task, gold: Task) -> int:
    return int(literally_equal(pred, gold))


def score_semantic(pred: Task, gold: Task, spec: ChartSpec) -> int:
    """Channel references that cannot be resolved simply never match."""
    try:
        return int(semantically_equal(pred, gold, spec))
    except ChartQueryError:
        return 0


def score_task(pred: Task, gold: Task, *, by_category: bool = False) -> int:
    if by_category:
        return int(task_category(pred.kind) == task_category(gold.kind))
    return int(pred.kind == gold.kind)


def _all_filters(task: Task) -> list[Filter]:
    out = list(task.filters)
    for sub in task.subtasks:
        out.extend(_all_filters(sub))
    return out


def _filter_key(f: Filter, spec: ChartSpec) -> str:
    """Serialized form of the filter with channel references resolved.

    An unresolvable reference keeps its raw text under a marker prefix,
    so two identically wrong filters still match each other without
    ever colliding with a resolved one.
    """
    probe = Task(kind=TaskKind.IDENTIFY, filters=(f,))
    try:
        resolved = resolve_channel_refs(probe, spec)
    except ChartQueryError:
        return "?" + serialize_filter(f)
    return serialize_filter(resolved.filters[0])


def score_filter(
    pred: Task, gold: Task, spec: ChartSpec, *, denominator: str = "max"
) -> float:
    """Fraction of filters matched one-to-one between prediction and gold.

    Matching is semantic equality of individual filter clauses; each gold
    clause can be claimed once.  Because matching is an equivalence, the
    maximum matching is the multiset intersection of serialized keys.
    The default denominator max(|gold|, |pred|) penalizes hallucinated
    clauses; "gold" scores against the gold count alone.
    """
    gold_keys = Counter(_filter_key(f, spec) for f in _all_filters(gold))
    pred_keys = Counter(_filter_key(f, spec) for f in _all_filters(pred))
    matched = sum((gold_keys & pred_keys).values())
    if denominator == "gold":
        denom = sum(gold_keys.values())
    else:
        denom = max(sum(gold_keys.values()), sum(pred_keys.values()))
    if denom == 0:
        return 1.0  # neither side asks for any filtering
    return matched / denom


def score_record(
    record: Record,
    raw: str,
    spec: ChartSpec,
    *,
    task_by_category: bool = False,
    filter_denominator: str = "max",
) -> ScoredRecord:
    try:
        predicted = parse_task_text(raw)
    except ChartQueryError:
        return ScoredRecord(record, raw, None, 0, 0, 0, 0, 0.0)
    return ScoredRecord(
        record=record,
        raw=raw,
        predicted=predicted,
        format=1,
        literal=score_literal(predicted, record.task),
        semantic=score_semantic(predicted, record.task, spec),
        task=score_task(predicted, record.task, by_category=task_by_category),
        filter=score_filter(
            predicted, record.task, spec, denominator=filter_denominator
        ),
    )


def _spec_for(record: Record, specs: ChartSpec | Mapping[str, ChartSpec]) -> ChartSpec:
    if isinstance(specs, ChartSpec):
        return specs
    return specs[record.combo_id]


def _means(scored: Iterable[ScoredRecord]) -> dict[str, float]:
    rows = list(scored)
    n = len(rows)
    return {
        m: (sum(getattr(r, m) for r in rows) / n) * 100.0 if n else 0.0
        for m in METRICS
    }


def evaluate(
    records: Iterable[Record],
    backend: Backend,
    specs: ChartSpec | Mapping[str, ChartSpec],
    *,
    task_by_category: bool = False,
    filter_denominator: str = "max",
) -> EvalReport:
    """Run a translation backend over a dataset and aggregate the scores.

    The backend is any callable from (query text, chart) to raw task
    text.  A backend that raises is scored as output that failed to
    parse; nothing propagates.
    """
    scored: list[ScoredRecord] = []
    for record in records:
        spec = _spec_for(record, specs)
        try:
            raw = backend(record.query, spec)
        except Exception:
            scored.append(ScoredRecord(record, "", None, 0, 0, 0, 0, 0.0))
            continue
        scored.append(
            score_record(
                record,
                raw,
                spec,
                task_by_category=task_by_category,
                filter_denominator=filter_denominator,
            )
        )
    if not scored:
        raise ValueError("cannot evaluate an empty dataset")
    buckets: dict[str, list[ScoredRecord]] = {}
    for row in scored:
        buckets.setdefault(row.record.category, []).append(row)
    return EvalReport(
        count=len(scored),
        means=_means(scored),
        category_counts={c: len(rows) for c, rows in sorted(buckets.items())},
        by_category={c: _means(rows) for c, rows in sorted(buckets.items())},
        records=tuple(scored),
    )


def rules_backend() -> Backend:
    """The deterministic rule translator wrapped as an evaluation backend."""
    from .translate import RulesTranslator

    translator = RulesTranslator()

    def run(query: str, spec: ChartSpec) -> str:
        return serialize_task(translator.translate(query, spec).task)

    return run


def report_to_json(report: EvalReport) -> dict:
    return {
        "count": report.count,
        "means": {m: report.means[m] for m in METRICS},
        "categoryCounts": dict(report.category_counts),
        "byCategory": {
            c: {m: v[m] for m in METRICS} for c, v in report.by_category.items()
        },
    }


def report_markdown(report: EvalReport) -> str:
    """Render the aggregate scores as a markdown table, one row per category."""
    head = "| Category | Records | " + " | ".join(
        f"{m.capitalize()} (%)" for m in METRICS
    )
    lines = [head + " |", "|" + " --- |" * (len(METRICS) + 2)]

    def fmt(label: str, n: int, means: dict[str, float]) -> str:
        cells = " | ".join(f"{means[m]:.1f}" for m in METRICS)
        return f"| {label} | {n} | {cells} |"

    for cat, means in report.by_category.items():
        lines.append(fmt(cat, report.category_counts[cat], means))
    lines.append(fmt("overall", report.count, report.means))
    return "\n".join(lines)
