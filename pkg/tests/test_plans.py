"""Golden end-to-end scenarios: query text to plan on the big demo chart."""

from __future__ import annotations

import json
import pathlib
import time

import pytest

from chartquery.chart.model import initial_state
from chartquery.demo import covid_spec
from chartquery.manip import apply_all, plan, step_to_json
from chartquery.translate.rules import RulesTranslator

GOLDEN = pathlib.Path(__file__).parent / "golden"
SCENARIOS = sorted(p.stem for p in GOLDEN.glob("scenario-*.json"))


@pytest.fixture(scope="module")
def covid_state():
    return initial_state(covid_spec())


def _digest(step) -> dict:
    """Step JSON with bulky row lists collapsed to counts."""
    doc = step_to_json(step)
    p = doc["params"]
    if "rows" in p:
        p["rowCount"] = len(p.pop("rows"))
    if "keepRows" in p:
        p["keepRowCount"] = len(p.pop("keepRows"))
    if "y" in p and isinstance(p["y"], float):
        p["y"] = round(p["y"], 2)
    if "domain" in p and "y" in p["domain"]:
        p["domain"]["y"] = [round(v, 2) for v in p["domain"]["y"]]
    return doc


def _replay(name: str, state):
    doc = json.loads((GOLDEN / f"{name}.json").read_text())
    translator = RulesTranslator()
    current = state
    digests, plan_seconds, final_frames = [], [], None
    for query in doc["queries"]:
        translation = translator.translate(query, current.spec, current)
        t0 = time.perf_counter()
        steps = plan(translation.task, current)
        plan_seconds.append(time.perf_counter() - t0)
        frames = apply_all(steps, current)
        digests.append([_digest(s) for s in steps])
        final_frames = frames
        current = frames[-1].state
    return doc, digests, plan_seconds, final_frames


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenario_matches_golden(name, covid_state):
    doc, digests, _, _ = _replay(name, covid_state)
    got_kinds = [[s["kind"] for s in p] for p in digests]
    want_kinds = [[s["kind"] for s in p] for p in doc["plans"]]
    assert got_kinds == want_kinds
    assert digests == doc["plans"]


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenario_plans_compile_quickly(name, covid_state):
    _, _, plan_seconds, _ = _replay(name, covid_state)
    assert all(s < 1.0 for s in plan_seconds), plan_seconds


def test_window_max_matches_brute_force(covid_state):
    _, digests, _, frames = _replay("scenario-window-max", covid_state)
    note = frames[-1].state.annotations[-1]
    rows = covid_state.spec.rows
    best = max(
        (r for r in rows
         if r["country"] in ("India", "Canada", "Germany")
         and "2021-11-20" <= r["date"] <= "2022-05-01"),
        key=lambda r: r["daily new cases"],
    )
    assert note.x == best["date"]
    assert note.y == float(best["daily new cases"])
    assert str(int(best["daily new cases"])) in note.text


def test_stacked_trend_final_state(covid_state):
    _, _, _, frames = _replay("scenario-stacked-trend", covid_state)
    final = frames[-1].state
    assert final.mark == "area"
    assert final.stacked
    # Re-encoding and stacking never drop data.
    assert final.visible == covid_state.visible


def test_snapshot_ranking_highlights_the_top_three(covid_state):
    _, _, _, frames = _replay("scenario-snapshot-ranking", covid_state)
    final = frames[-1].state
    assert final.mark == "bar"
    day = [r for r in covid_state.spec.rows if r["date"] == "2022-01-15"]
    expected = {r["country"] for r in sorted(day, key=lambda r: -r["daily new cases"])[:3]}
    focused = {
        row["country"]
        for idx, row, series in final.visible_rows()
        if series is None and final.highlight_map().get(idx) == "focus"
    }
    assert focused == expected


def test_sum_then_average_guideline_value(covid_state):
    _, _, _, frames = _replay("scenario-sum-then-average", covid_state)
    note = frames[-1].state.annotations[-1]
    assert note.guideline == "horizontal"
    by_date: dict[str, float] = {}
    for r in covid_state.spec.rows:
        if r["country"] in ("India", "Canada") and "2022-01-01" <= r["date"] <= "2022-03-31":
            by_date[r["date"]] = by_date.get(r["date"], 0.0) + float(r["daily new cases"])
    expected = sum(by_date.values()) / len(by_date)
    assert note.y == pytest.approx(expected, rel=1e-9)


def test_every_scenario_keyframe_has_svg(covid_state):
    for name in SCENARIOS:
        _, _, _, frames = _replay(name, covid_state)
        assert frames[0].step is None
        for frame in frames:
            assert frame.svg.startswith("<svg")
            assert frame.index == frames.index(frame)
