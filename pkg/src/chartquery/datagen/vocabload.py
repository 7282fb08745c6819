"""Domain vocabulary for the synthetic corpus.

Each vocabulary file describes one data domain: a categorical attribute
with its choices and per-choice colors, one or two quantitative
attributes with plausible value ranges, and the temporal granularities
the domain supports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from chartquery.errors import VocabMissing


@dataclass(frozen=True)
class QuantSpec:
    name: str
    synonyms: tuple[str, ...]
    unit: str
    scale: tuple[float, float]


@dataclass(frozen=True)
class Domain:
    name: str
    cat_name: str
    cat_synonyms: tuple[str, ...]
    choices: tuple[str, ...]
    colors: dict[str, str]
    quants: tuple[QuantSpec, ...]
    granularities: tuple[str, ...]
    year_start: int


def _parse(doc: dict) -> Domain:
    cat = doc["categorical"]
    quants = tuple(
        QuantSpec(
            name=q["name"],
            synonyms=tuple(q.get("synonyms", [])),
            unit=q.get("unit", ""),
            scale=(float(q["scale"][0]), float(q["scale"][1])),
        )
        for q in doc["quantitative"]
    )
    return Domain(
        name=doc["domain"],
        cat_name=cat["name"],
        cat_synonyms=tuple(cat.get("synonyms", [])),
        choices=tuple(cat["choices"]),
        colors=dict(cat.get("colors", {})),
        quants=quants,
        granularities=tuple(doc["granularities"]),
        year_start=int(doc["yearStart"]),
    )


def load_domains() -> list[Domain]:
    """Load every bundled domain vocabulary, sorted by domain name."""
    root = resources.files("chartquery.datagen") / "vocab"
    docs = []
    for entry in root.iterdir():
        if entry.name.endswith(".json"):
            docs.append(_parse(json.loads(entry.read_text())))
    if not docs:
        raise VocabMissing("no vocabulary files bundled under chartquery.datagen/vocab")
    docs.sort(key=lambda d: d.name)
    return docs
