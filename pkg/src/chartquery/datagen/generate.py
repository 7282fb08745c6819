"""Corpus generation: weighted templates over synthesized charts.

Counts are allocated by largest remainder so the category mix is exact
for any corpus size; referent styles are balanced greedily against
their target fractions, honoring per-slot eligibility (list items stay
name-references, the mixed form only appears on a first operand).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Callable, Iterable

from chartquery.chart.model import temporal_period
from chartquery.datagen.combos import gen_combos
from chartquery.datagen.synth import build_spec
from chartquery.datagen.templates import SLOT_STYLES, TEMPLATES, SpecCtx, Template
from chartquery.datagen.vocabload import load_domains
from chartquery.taskir import Task, canonicalize, serialize_task, task_from_json, task_to_json, validate

CATEGORY_WEIGHTS = {
    "identification": 0.5660,
    "comparison": 0.1406,
    "aggregation": 0.1411,
    "derivation": 0.1522,
}

REFERENT_TARGETS = {"byName": 0.8665, "byChannel": 0.0932, "mixed": 0.0402}


@dataclass(frozen=True)
class Record:
    id: str
    query: str
    task: Task
    template: str
    category: str
    combo_id: str
    domain: str
    styles: tuple[str, ...]


def _largest_remainder(total: int, weights: dict[str, float]) -> dict[str, int]:
    scale = sum(weights.values())
    quotas = {k: total * w / scale for k, w in weights.items()}
    counts = {k: int(q) for k, q in quotas.items()}
    short = total - sum(counts.values())
    by_remainder = sorted(quotas, key=lambda k: quotas[k] - counts[k], reverse=True)
    for k in by_remainder[:short]:
        counts[k] += 1
    return counts


class _StyleBalancer:
    """Greedy quota matching for referent surface styles."""

    def __init__(self, targets: dict[str, float]) -> None:
        self.targets = targets
        self.counts = {k: 0 for k in targets}
        self.total = 0

    def pick(self, eligible: tuple[str, ...]) -> str:
        def deficit(style: str) -> float:
            return self.targets[style] * (self.total + 1) - self.counts[style]

        chosen = max(eligible, key=deficit)
        self.counts[chosen] += 1
        self.total += 1
        return chosen


def _build_contexts(seed: int) -> list[SpecCtx]:
    domains = {d.name: d for d in load_domains()}
    out = []
    for combo in gen_combos(list(domains.values())):
        domain = domains[combo.domain]
        spec = build_spec(domain, combo, seed)
        cat_attr = spec.categorical()
        stamps: tuple[str, ...] = ()
        if combo.temporal:
            seen = dict.fromkeys(str(r["time"]) for r in spec.rows)
            stamps = tuple(sorted(seen, key=lambda s: temporal_period(s)[0]))
        out.append(
            SpecCtx(
                domain=domain,
                combo=combo,
                spec=spec,
                cat=cat_attr.name,
                choices=cat_attr.choices,
                colors={c: domain.colors[c] for c in cat_attr.choices if c in domain.colors},
                quants=tuple(a.name for a in spec.quantitatives()),
                stamps=stamps,
            )
        )
    return out


def _compatible(template: Template, ctx: SpecCtx) -> bool:
    if template.chart == "temporal":
        return ctx.combo.temporal and len(ctx.quants) == 1
    if template.chart == "snapshot":
        return not ctx.combo.temporal and len(ctx.quants) == 1
    if template.chart == "twoquant":
        return len(ctx.quants) == 2
    return len(ctx.quants) == 1


def generate_dataset(
    n: int = 5867,
    seed: int = 7,
    paraphrase: Callable[[str, random.Random], str] | None = None,
) -> list[Record]:
    """Generate n query/task pairs with the pinned corpus statistics.

    The paraphrase hook rewrites the surface text after gold assembly;
    the default identity keeps queries mechanically parseable.
    """
    rng = random.Random(seed)
    contexts = _build_contexts(seed)
    balancer = _StyleBalancer(REFERENT_TARGETS)

    category_counts = _largest_remainder(n, CATEGORY_WEIGHTS)
    records: list[Record] = []
    for category, cat_count in category_counts.items():
        members = [t for t in TEMPLATES if t.category == category]
        weights = {t.name: t.weight for t in members}
        template_counts = _largest_remainder(cat_count, weights)
        for template in members:
            pool = [c for c in contexts if _compatible(template, c)]
            if not pool:
                raise RuntimeError(f"no chart configuration fits template {template.name}")
            for _ in range(template_counts[template.name]):
                ctx = rng.choice(pool)
                styles = tuple(
                    balancer.pick(SLOT_STYLES[slot]) for slot in template.slots
                )
                text, task = template.realize(ctx, rng, styles)
                task = canonicalize(task)
                validate(task)
                if paraphrase is not None:
                    text = paraphrase(text, rng)
                records.append(
                    Record(
                        id="",
                        query=text,
                        task=task,
                        template=template.name,
                        category=category,
                        combo_id=ctx.combo.id,
                        domain=ctx.domain.name,
                        styles=styles,
                    )
                )
    rng.shuffle(records)
    return [
        Record(
            id=f"q{i + 1:05d}",
            query=r.query,
            task=r.task,
            template=r.template,
            category=r.category,
            combo_id=r.combo_id,
            domain=r.domain,
            styles=r.styles,
        )
        for i, r in enumerate(records)
    ]


def count_filters(task: Task) -> int:
    return len(task.filters) + sum(len(s.filters) for s in task.subtasks)


def dataset_stats(records: Iterable[Record]) -> dict:
    records = list(records)
    n = len(records)
    categories = {k: 0 for k in CATEGORY_WEIGHTS}
    styles = {k: 0 for k in REFERENT_TARGETS}
    templates: dict[str, int] = {}
    total_filters = 0
    total_refs = 0
    for r in records:
        categories[r.category] += 1
        templates[r.template] = templates.get(r.template, 0) + 1
        total_filters += count_filters(r.task)
        for s in r.styles:
            styles[s] += 1
            total_refs += 1
    return {
        "n": n,
        "categoryPct": {k: 100.0 * v / n for k, v in categories.items()},
        "referentPct": {k: 100.0 * v / total_refs for k, v in styles.items()},
        "meanFilters": total_filters / n,
        "templates": dict(sorted(templates.items())),
    }


def write_jsonl(records: Iterable[Record], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            row = {
                "id": r.id,
                "query": r.query,
                "gold": task_to_json(r.task),
                "goldText": serialize_task(r.task),
                "template": r.template,
                "category": r.category,
                "combo": r.combo_id,
                "domain": r.domain,
                "styles": list(r.styles),
            }
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def read_jsonl(path: str) -> list[Record]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            out.append(
                Record(
                    id=row["id"],
                    query=row["query"],
                    task=task_from_json(row["gold"]),
                    template=row["template"],
                    category=row["category"],
                    combo_id=row["combo"],
                    domain=row["domain"],
                    styles=tuple(row["styles"]),
                )
            )
    return out


def build_context_map(seed: int = 7) -> dict[str, SpecCtx]:
    """Chart contexts keyed by combo id, for replaying records."""
    return {ctx.combo.id: ctx for ctx in _build_contexts(seed)}
