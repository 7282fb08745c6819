"""Ready-made chart specs for demos, docs and end-to-end tests."""

from __future__ import annotations

import math
import random
from datetime import date, timedelta

from .chart.model import ChartSpec, load_chart_spec

_COUNTRIES = ("India", "Canada", "Germany", "United States", "Brazil", "France")
_COLORS = ("red", "blue", "green", "orange", "purple", "brown")

# (baseline, [(wave center as day offset, width in days, height)])
_WAVES = {
    "India": (900, [(470, 45, 390000), (740, 30, 310000)]),
    "Canada": (700, [(360, 60, 8000), (740, 25, 39000)]),
    "Germany": (1100, [(420, 55, 21000), (780, 40, 190000)]),
    "United States": (24000, [(350, 50, 230000), (735, 22, 800000)]),
    "Brazil": (5000, [(390, 70, 76000), (755, 28, 180000)]),
    "France": (2600, [(450, 40, 52000), (745, 20, 360000)]),
}


def covid_spec() -> ChartSpec:
    """Daily new case counts for six countries, 2020-01-01 to 2022-10-05.

    One line per country, a little over a thousand points each.  The
    numbers are synthetic (two waves per country plus noise) but the
    shape and scale track the familiar charts.
    """
    start = date(2020, 1, 1)
    n_days = (date(2022, 10, 5) - start).days + 1
    rng = random.Random(20221005)
    rows = []
    for day in range(n_days):
        stamp = (start + timedelta(days=day)).isoformat()
        for country in _COUNTRIES:
            base, waves = _WAVES[country]
            value = float(base)
            for center, width, height in waves:
                value += height * math.exp(-(((day - center) / width) ** 2))
            value *= 1.0 + rng.uniform(-0.08, 0.08)
            rows.append(
                {"country": country, "date": stamp, "daily new cases": round(max(value, 0.0))}
            )
    doc = {
        "title": "Daily new confirmed cases",
        "mark": "line",
        "attributes": [
            {
                "name": "country",
                "type": "categorical",
                "synonyms": ["nation"],
                "choices": list(_COUNTRIES),
            },
            {"name": "date", "type": "temporal", "synonyms": ["day"], "granularity": "date"},
            {
                "name": "daily new cases",
                "type": "quantitative",
                "synonyms": ["cases", "case count"],
                "unit": "cases",
            },
        ],
        "encodings": {"x": "date", "y": "daily new cases", "color": "country"},
        "channelBindings": [
            {"channel": "color", "value": color, "choice": country}
            for country, color in zip(_COUNTRIES, _COLORS)
        ],
        "rows": rows,
    }
    return load_chart_spec(doc)


def energy_spec() -> ChartSpec:
    """A small three-series line chart of yearly energy consumption."""
    series = {
        "coal": [44, 43, 41, 40, 38, 37, 35, 33, 30, 28, 25, 24, 22],
        "gas": [30, 31, 31, 32, 33, 35, 36, 36, 37, 38, 38, 39, 40],
        "solar": [2, 3, 4, 6, 8, 10, 13, 16, 20, 24, 28, 33, 38],
    }
    rows = [
        {"energy type": kind, "year": str(2010 + i), "consumption": v}
        for kind, values in series.items()
        for i, v in enumerate(values)
    ]
    doc = {
        "title": "Energy consumption by source",
        "mark": "line",
        "attributes": [
            {
                "name": "energy type",
                "type": "categorical",
                "synonyms": ["energy", "source"],
                "choices": ["coal", "gas", "solar"],
            },
            {"name": "year", "type": "temporal", "synonyms": [], "granularity": "year"},
            {
                "name": "consumption",
                "type": "quantitative",
                "synonyms": ["usage"],
                "unit": "TWh",
            },
        ],
        "encodings": {"x": "year", "y": "consumption", "color": "energy type"},
        "channelBindings": [
            {"channel": "color", "value": "gray", "choice": "coal"},
            {"channel": "color", "value": "blue", "choice": "gas"},
            {"channel": "color", "value": "green", "choice": "solar"},
        ],
        "rows": rows,
    }
    return load_chart_spec(doc)
