"""Synthetic chart and query-pair generation."""

from chartquery.datagen.combos import Combo, gen_combos
from chartquery.datagen.generate import (
    Record,
    dataset_stats,
    generate_dataset,
    read_jsonl,
    write_jsonl,
)
from chartquery.datagen.synth import build_spec
from chartquery.datagen.templates import TEMPLATES, Template
from chartquery.datagen.vocabload import Domain, load_domains

__all__ = [
    "Combo",
    "Domain",
    "Record",
    "TEMPLATES",
    "Template",
    "build_spec",
    "dataset_stats",
    "gen_combos",
    "generate_dataset",
    "load_domains",
    "read_jsonl",
    "write_jsonl",
]
