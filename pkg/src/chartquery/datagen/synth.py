"""Deterministic chart-document synthesis for a combo."""

from __future__ import annotations

import datetime
import random

from chartquery.chart.model import ChartSpec, load_chart_spec
from chartquery.datagen.combos import Combo
from chartquery.datagen.vocabload import Domain

_TEMPORAL_SYNONYMS = {
    "year": ("year",),
    "quarter": ("quarter",),
    "date": ("date", "day"),
}


def _timestamps(gran: str, year_start: int, rng: random.Random) -> list[str]:
    if gran == "year":
        count = rng.randint(8, 16)
        start = year_start + rng.randint(0, 4)
        return [str(start + i) for i in range(count)]
    if gran == "quarter":
        count = rng.randint(8, 12)
        start = year_start + rng.randint(0, 2)
        out = []
        for i in range(count):
            out.append(f"{start + i // 4}Q{i % 4 + 1}")
        return out
    count = rng.randint(30, 60)
    first = datetime.date(year_start, 1, 1) + datetime.timedelta(days=rng.randint(0, 200))
    return [(first + datetime.timedelta(days=i)).isoformat() for i in range(count)]


def _round(value: float, scale_hi: float) -> float | int:
    if scale_hi >= 100:
        return int(round(value))
    return round(value, 2)


def build_spec(domain: Domain, combo: Combo, seed: int = 0) -> ChartSpec:
    """Synthesize the chart document a combo describes and load it.

    Values follow a per-choice base level with a mild trend and noise so
    extremes and rankings differ across charts.  Everything derives from
    (combo.id, seed), so repeated calls agree byte for byte.
    """
    rng = random.Random(f"{combo.id}|{seed}")
    choices = list(domain.choices)
    if combo.n_choices is not None:
        choices = choices[: combo.n_choices]

    quants = [domain.quants[i] for i in combo.quant_idx]
    attrs: list[dict] = [
        {
            "name": domain.cat_name,
            "type": "categorical",
            "choices": choices,
            "synonyms": list(domain.cat_synonyms),
        }
    ]
    if combo.temporal:
        stamps = _timestamps(combo.granularity, domain.year_start, rng)
        attrs.append(
            {
                "name": "time",
                "type": "temporal",
                "granularity": combo.granularity,
                "span": [stamps[0], stamps[-1]],
                "synonyms": list(_TEMPORAL_SYNONYMS[combo.granularity]),
            }
        )
    else:
        stamps = []
    for q in quants:
        attrs.append(
            {
                "name": q.name,
                "type": "quantitative",
                "range": [q.scale[0], q.scale[1]],
                "synonyms": list(q.synonyms),
                "unit": q.unit,
            }
        )

    rows: list[dict] = []
    for choice in choices:
        bases = {}
        slopes = {}
        for q in quants:
            lo, hi = q.scale
            bases[q.name] = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo))
            slopes[q.name] = rng.uniform(-0.05, 0.09)
        if not combo.temporal:
            row = {domain.cat_name: choice}
            for q in quants:
                row[q.name] = _round(bases[q.name], q.scale[1])
            rows.append(row)
            continue
        for step, stamp in enumerate(stamps):
            row = {domain.cat_name: choice, "time": stamp}
            for q in quants:
                lo, hi = q.scale
                drift = bases[q.name] * slopes[q.name] * step
                noise = rng.uniform(-0.04, 0.04) * bases[q.name]
                value = max(lo * 0.5, min(hi * 1.2, bases[q.name] + drift + noise))
                row[q.name] = _round(value, hi)
            rows.append(row)

    enc = {"x": "time" if combo.temporal else domain.cat_name, "y": quants[0].name}
    if combo.temporal or len(quants) == 1:
        enc["color"] = domain.cat_name
    doc = {
        "title": f"{quants[0].name} by {domain.cat_name}",
        "mark": combo.mark,
        "attributes": attrs,
        "rows": rows,
        "encodings": enc,
        "channelBindings": [
            {"channel": "color", "value": domain.colors[c], "choice": c}
            for c in choices
            if c in domain.colors
        ],
    }
    return load_chart_spec(doc)
