"""Surface vocabulary shared by the rule translator.

Kept separate from the rules so tests and the dataset tooling can agree
on one notion of superlatives, ordinals, and time token shapes.
"""

from __future__ import annotations

import re

MAX_WORDS = ("highest", "largest", "greatest", "biggest", "maximum", "peak", "most")
MIN_WORDS = ("lowest", "smallest", "minimum", "least", "fewest")

ORDINAL_WORDS = {
    "second": 2,
    "third": 3,
    "fourth": 4,
    "fifth": 5,
    "sixth": 6,
    "seventh": 7,
    "eighth": 8,
    "ninth": 9,
    "tenth": 10,
    "2nd": 2,
    "3rd": 3,
    "4th": 4,
    "5th": 5,
}

COUNT_WORDS = {
    "two": 2,
    "three": 3,
    "four": 4,
    "five": 5,
    "six": 6,
    "seven": 7,
    "eight": 8,
    "nine": 9,
    "ten": 10,
}

SERIES_NOUNS = ("line", "bar", "area", "series", "slice", "segment", "one")

DATE_RE = re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b")
QUARTER_RE = re.compile(r"\b(\d{4})\s*Q([1-4])\b|\bQ([1-4])\s+(\d{4})\b")
YEAR_RE = re.compile(r"\b(1[5-9]\d{2}|2\d{3})\b")
NUMBER_RE = re.compile(r"[-+]?\d[\d,]*(?:\.\d+)?")


def pluralize(word: str) -> str:
    if word.endswith("s"):
        return word  # already plural, or an s-final noun like "species"
    if re.search(r"[^aeiou]y$", word):
        return word[:-1] + "ies"
    if re.search(r"(x|z|ch|sh)$", word):
        return word + "es"
    return word + "s"


def parse_count(token: str) -> int | None:
    """Read a small count from a digit string or a number word."""
    token = token.strip().lower()
    if token.isdigit():
        return int(token)
    return COUNT_WORDS.get(token)


def normalize_number(token: str) -> str:
    """Strip digit grouping; keep the surface decimal form."""
    cleaned = token.replace(",", "")
    try:
        as_float = float(cleaned)
    except ValueError:
        return cleaned
    if as_float == int(as_float) and "." not in cleaned:
        return str(int(as_float))
    return cleaned
