"""Planner rules: filters to steps, derivations, output emphasis."""

from __future__ import annotations

import random

import pytest
from stategen import random_state

from chartquery.chart.model import initial_state, load_chart_spec
from chartquery.datagen import generate_dataset
from chartquery.datagen.generate import build_context_map
from chartquery.demo import energy_spec
from chartquery.errors import EmptySelection, UnplannableTask, UnresolvableReference
from chartquery.manip import PHASES, PlanPolicy, apply, apply_all, plan
from chartquery.manip.steps import Derive, Highlight, Reduce
from chartquery.taskir import (
    AggregateSpec,
    AggregateValue,
    AttributeRef,
    DeriveSpec,
    Direction,
    Filter,
    FilterOp,
    ListValue,
    Literal,
    RangeValue,
    Task,
    TaskKind,
    parse_task_text,
)


@pytest.fixture()
def energy_state():
    return initial_state(energy_spec())


def _task(text: str) -> Task:
    return parse_task_text(text)


def _kinds(steps) -> list[str]:
    return [s.kind for s in steps]


def _phases_ordered(steps) -> bool:
    order = [PHASES.index(s.phase) for s in steps]
    return order == sorted(order)


class TestFilterPlanning:
    def test_small_categorical_selection_highlights(self, energy_state):
        steps = plan(_task("(identify consumption; filter: energy type = coal)"), energy_state)
        assert _kinds(steps)[0] == "highlight"
        focused = {
            energy_state.spec.rows[i]["energy type"] for i in steps[0].rows
        }
        assert focused == {"coal"}

    def test_large_categorical_selection_reduces(self, energy_state):
        text = "(identify consumption; filter: energy type = [coal, gas])"
        steps = plan(_task(text), energy_state)
        assert _kinds(steps)[:2] == ["reduce", "rescale"]

    def test_threshold_policy_is_tunable(self, energy_state):
        text = "(identify consumption; filter: energy type = [coal, gas])"
        steps = plan(_task(text), energy_state, PlanPolicy(highlight_threshold=0.9))
        assert _kinds(steps)[0] == "highlight"

    def test_filter_matching_everything_plans_nothing(self, energy_state):
        text = "(identify consumption; filter: energy type = [coal, gas, solar])"
        assert plan(_task(text), energy_state) == []

    def test_time_window_reduces_and_rescales(self, energy_state):
        text = "(identify consumption; filter: year in [2012, 2015])"
        steps = plan(_task(text), energy_state)
        assert _kinds(steps)[:2] == ["reduce", "rescale"]
        years = {energy_state.spec.rows[i]["year"] for i in steps[0].keep_rows}
        assert years == {"2012", "2013", "2014", "2015"}
        assert steps[1].x_domain == ("2012", "2015")

    def test_narrow_window_keeps_context_on_the_axis(self):
        state = random_state(random.Random(3), n_stamps=30, n_series=2)
        start = min(r["year"] for r in state.spec.rows)
        steps = plan(_task(f"(identify value; filter: year = {start})"), state)
        rescale = next(s for s in steps if s.kind == "rescale")
        assert rescale.x_domain[0] == start
        assert rescale.x_domain[1] > start  # padded beyond the single year

    def test_channel_filter_resolves_to_its_series(self, energy_state):
        steps = plan(_task("(identify consumption; filter: color = green)"), energy_state)
        assert _kinds(steps)[0] == "highlight"
        focused = {energy_state.spec.rows[i]["energy type"] for i in steps[0].rows}
        assert focused == {"solar"}

    def test_empty_selection_raises(self, energy_state):
        with pytest.raises(EmptySelection):
            plan(_task("(identify consumption; filter: year in [1990, 1995])"), energy_state)

    def test_unknown_name_raises(self, energy_state):
        with pytest.raises(UnresolvableReference):
            plan(_task("(identify consumption; filter: wind = 2015)"), energy_state)


class TestIdentifyOutput:
    def test_value_lookup_is_annotated(self, energy_state):
        text = "(identify consumption; filter: energy type = coal, year = 2020)"
        steps = plan(_task(text), energy_state)
        assert _kinds(steps)[-1] == "annotate"
        note = steps[-1].annotation
        assert note.x == "2020"
        assert "coal: 25" in note.text

    def test_extreme_is_annotated_at_the_point(self, energy_state):
        text = (
            "(identify energy type; filter: consumption = max(consumption), "
            "year in [2010, 2015])"
        )
        steps = plan(_task(text), energy_state)
        note = steps[-1].annotation
        assert note.x == "2010" and note.y == 44.0
        assert "max consumption: 44" in note.text

    def test_extreme_respects_categorical_scope(self, energy_state):
        text = (
            "(identify consumption; filter: consumption = max(consumption), "
            "energy type = solar)"
        )
        steps = plan(_task(text), energy_state)
        note = steps[-1].annotation
        assert note.y == 38.0  # solar's own maximum, not the chart's

    def test_temporal_answer_gets_a_vertical_guideline(self, energy_state):
        text = "(identify year; filter: consumption = min(consumption), energy type = solar)"
        steps = plan(_task(text), energy_state)
        assert steps[-1].annotation.guideline == "vertical"
        assert steps[-1].annotation.x == "2010"

    def test_wide_selection_highlights_instead_of_annotating(self, energy_state):
        text = "(identify consumption; filter: consumption > 30)"
        steps = plan(_task(text), energy_state)
        assert _kinds(steps)[:2] == ["reduce", "rescale"]
        assert "annotate" not in _kinds(steps)


class TestRankPlanning:
    def test_top_k_on_a_time_point_reencodes_to_bar(self, energy_state):
        text = (
            "(identify energy type; filter: rank < 2 @top, year = 2020; "
            "derive: rank(consumption) @top)"
        )
        steps = plan(_task(text), energy_state)
        assert _kinds(steps) == ["reduce", "rescale", "reencode", "derive", "highlight"]
        assert steps[2].target_mark == "bar"
        final = energy_state
        for s in steps:
            final = apply(s, final)
        focused = {
            row["energy type"]
            for idx, row, series in final.visible_rows()
            if series is None and final.highlight_map().get(idx) == "focus"
        }
        assert focused == {"gas", "solar"}  # top two at 2020

    def test_ordinal_rank_highlights_one_series(self, energy_state):
        text = (
            "(identify energy type; filter: rank = 2 @top, year = 2020; "
            "derive: rank(consumption) @top)"
        )
        steps = plan(_task(text), energy_state)
        final = energy_state
        for s in steps:
            final = apply(s, final)
        focused = {
            row["energy type"]
            for idx, row, series in final.visible_rows()
            if series is None and final.highlight_map().get(idx) == "focus"
        }
        assert focused == {"solar"}  # 33 sits between gas 39 and coal 24

    def test_rank_without_time_point_keeps_the_mark(self, energy_state):
        text = "(identify energy type; filter: rank < 2 @top; derive: rank(consumption) @top)"
        steps = plan(_task(text), energy_state)
        assert "reencode" not in _kinds(steps)


class TestAggregatePlanning:
    def test_average_gets_a_horizontal_guideline(self, energy_state):
        text = (
            "(aggregate consumption; filter: consumption = avg(consumption), "
            "energy type = gas, year in [2010, 2013])"
        )
        steps = plan(_task(text), energy_state)
        note = steps[-1].annotation
        assert note.guideline == "horizontal"
        assert note.y == pytest.approx((30 + 31 + 31 + 32) / 4)

    def test_extreme_aggregate_lands_on_the_point(self, energy_state):
        text = (
            "(aggregate consumption; filter: consumption = max(consumption), "
            "energy type = gas)"
        )
        steps = plan(_task(text), energy_state)
        note = steps[-1].annotation
        assert note.x == "2022" and note.y == 40.0

    def test_empty_window_raises(self, energy_state):
        text = (
            "(aggregate consumption; filter: consumption = avg(consumption), "
            "year in [1990, 1999])"
        )
        with pytest.raises(EmptySelection):
            plan(_task(text), energy_state)


class TestTrendAndSum:
    def test_trend_on_many_series_stacks_an_area(self, energy_state):
        steps = plan(_task("(trend consumption)"), energy_state)
        assert _kinds(steps) == ["reencode", "rearrange"]
        assert steps[0].target_mark == "area"
        assert steps[1].mode == "stack"

    def test_trend_of_one_series_just_highlights(self, energy_state):
        steps = plan(_task("(trend consumption; filter: energy type = solar)"), energy_state)
        assert _kinds(steps) == ["highlight"]

    def test_trend_without_time_axis_is_unplannable(self):
        snapshot = random_state(random.Random(9), temporal=False)
        with pytest.raises(UnplannableTask):
            plan(_task("(trend value)"), snapshot)

    def test_two_series_sum_derives_and_highlights(self, energy_state):
        steps = plan(_task("(sum consumption; derive: sum(coal, gas))"), energy_state)
        assert _kinds(steps) == ["derive", "highlight"]
        assert steps[0].name == "combined coal and gas"

    def test_three_series_sum_stacks_instead(self, energy_state):
        text = "(sum consumption; derive: sum(coal, gas, solar))"
        steps = plan(_task(text), energy_state)
        assert _kinds(steps) == ["reencode", "rearrange"]

    def test_sum_window_filters_first(self, energy_state):
        text = "(sum consumption; filter: year in [2015, 2018]; derive: sum(coal, gas))"
        steps = plan(_task(text), energy_state)
        assert _kinds(steps) == ["reduce", "rescale", "derive", "highlight"]
        frames = apply_all(steps, energy_state)
        derived = frames[-1].state.derived[-1]
        assert [r["year"] for r in derived.rows] == ["2015", "2016", "2017", "2018"]

    def test_column_sum_on_a_two_measure_chart(self):
        doc = {
            "title": "trade",
            "mark": "bar",
            "attributes": [
                {
                    "name": "product",
                    "type": "categorical",
                    "synonyms": [],
                    "choices": ["apples", "pears"],
                },
                {"name": "imports", "type": "quantitative", "synonyms": [], "unit": "t"},
                {"name": "exports", "type": "quantitative", "synonyms": [], "unit": "t"},
            ],
            "encodings": {"x": "product", "y": "imports"},
            "channelBindings": [],
            "rows": [
                {"product": "apples", "imports": 10.0, "exports": 4.0},
                {"product": "pears", "imports": 7.0, "exports": 9.0},
            ],
        }
        state = initial_state(load_chart_spec(doc))
        text = "(sum imports; filter: product = apples; derive: sum(imports, exports))"
        steps = plan(_task(text), state)
        assert _kinds(steps) == ["highlight", "derive", "highlight"]
        frames = apply_all(steps, state)
        derived = frames[-1].state.derived[-1]
        assert len(derived.rows) == 1
        assert derived.rows[0]["imports"] == 14.0


class TestComparePlanning:
    def test_shared_time_filter_is_planned_once(self, energy_state):
        text = (
            "(compare consumption; derive: difference(gas, coal); "
            "sub: (identify consumption; filter: energy type = coal, year = 2020), "
            "(identify consumption; filter: energy type = gas, year = 2020))"
        )
        steps = plan(_task(text), energy_state)
        kinds = _kinds(steps)
        assert kinds.count("reduce") == 1
        assert kinds[:2] == ["reduce", "rescale"]
        assert "derive" in kinds
        notes = [s.annotation.text for s in steps if s.kind == "annotate"]
        assert notes == ["coal: 25", "gas: 38"]

    def test_union_of_both_sides_is_highlighted(self, energy_state):
        text = (
            "(compare consumption; derive: difference(gas, coal); "
            "sub: (identify consumption; filter: energy type = coal), "
            "(identify consumption; filter: energy type = gas))"
        )
        steps = plan(_task(text), energy_state)
        first = next(s for s in steps if s.kind == "highlight")
        focused = {energy_state.spec.rows[i]["energy type"] for i in first.rows}
        assert focused == {"coal", "gas"}
        derive = next(s for s in steps if s.kind == "derive")
        assert derive.name == "difference of gas and coal"

    def test_bar_comparison_aligns(self):
        state = random_state(random.Random(21), mark="bar", n_series=4, n_stamps=3)
        start = min(r["year"] for r in state.spec.rows)
        text = (
            f"(compare value; derive: difference(alpha, beta); "
            f"sub: (identify value; filter: group = alpha, year = {start}), "
            f"(identify value; filter: group = beta, year = {start}))"
        )
        steps = plan(_task(text), state)
        assert any(s.kind == "rearrange" and s.mode == "align" for s in steps)

    def test_empty_side_raises(self, energy_state):
        text = (
            "(compare consumption; derive: difference(gas, coal); "
            "sub: (identify consumption; filter: energy type = coal, year = 1999), "
            "(identify consumption; filter: energy type = gas, year = 2020))"
        )
        with pytest.raises(EmptySelection):
            plan(_task(text), energy_state)


class TestGeneratedCorpusIntegration:
    """Every generated gold task should plan and apply on its own chart."""

    def test_generated_tasks_plan_cleanly(self):
        records = generate_dataset(n=80, seed=23)
        contexts = build_context_map(seed=23)
        planned = 0
        empty = 0
        for record in records:
            state = initial_state(contexts[record.combo_id].spec)
            try:
                steps = plan(record.task, state)
            except EmptySelection:
                empty += 1
                continue
            assert _phases_ordered(steps), record.query
            frames = apply_all(steps, state)
            assert len(frames) == len(steps) + 1
            planned += 1
        assert planned >= 72  # a small number of windows may select nothing
        assert planned + empty == len(records)
