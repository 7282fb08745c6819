"""SVG rendering: byte determinism, stable ids, highlight classes."""

from __future__ import annotations

import dataclasses
import re
from xml.dom import minidom

from chartquery.chart import initial_state, load_chart_spec, render_svg
from chartquery.chart.model import Annotation, DerivedSeries
from chartquery.chart.svg import stable_id


def line_state():
    spec = load_chart_spec(
        {
            "title": "Output by source",
            "mark": "line",
            "attributes": [
                {"name": "energy", "type": "categorical", "choices": ["coal", "gas", "solar"]},
                {"name": "time", "type": "temporal", "granularity": "year"},
                {"name": "consumption", "type": "quantitative"},
            ],
            "encodings": {"x": "time", "y": "consumption", "color": "energy"},
            "channelBindings": [{"channel": "color", "value": "green", "choice": "solar"}],
            "rows": [
                {"energy": e, "time": str(y), "consumption": float(10 * i + y % 5 + 1)}
                for i, e in enumerate(["coal", "gas", "solar"])
                for y in range(2018, 2023)
            ],
        }
    )
    return initial_state(spec)


def bar_state():
    spec = load_chart_spec(
        {
            "mark": "bar",
            "attributes": [
                {"name": "industry", "type": "categorical", "choices": ["tech", "retail", "banking"]},
                {"name": "revenue", "type": "quantitative"},
            ],
            "encodings": {"x": "industry", "y": "revenue"},
            "rows": [
                {"industry": "tech", "revenue": 320.0},
                {"industry": "retail", "revenue": 150.0},
                {"industry": "banking", "revenue": 210.0},
            ],
        }
    )
    return initial_state(spec)


class TestDeterminism:
    def test_same_state_same_bytes(self):
        st = line_state()
        assert render_svg(st) == render_svg(st)

    def test_rebuilt_state_same_bytes(self):
        assert render_svg(line_state()) == render_svg(line_state())

    def test_well_formed_xml(self):
        for st in (line_state(), bar_state()):
            minidom.parseString(render_svg(st))

    def test_no_unstable_float_noise(self):
        svg = render_svg(line_state())
        # every coordinate is fixed-precision; scientific notation or a
        # long float repr would betray unformatted floats leaking through
        coords = re.findall(r'(?:\bd|x\d?|y\d?|width|height)="([^"]*)"', svg)
        for chunk in coords:
            for token in re.findall(r"[-+]?\d[\w.+-]*", chunk):
                assert re.fullmatch(r"[-+]?\d+(\.\d{1,2})?", token), token


class TestStableIds:
    def test_series_path_id_survives_highlighting(self):
        st = line_state()
        sid = stable_id("coal", "series")
        svg1 = render_svg(st)
        hl = dataclasses.replace(
            st, highlights=tuple((i, "focus") for i in range(5))
        )
        svg2 = render_svg(hl)
        assert sid in svg1 and sid in svg2

    def test_bar_ids_are_per_category(self):
        svg = render_svg(bar_state())
        for name in ("tech", "retail", "banking"):
            assert stable_id(name, "", "revenue") in svg

    def test_ids_unique_within_document(self):
        svg = render_svg(line_state())
        ids = re.findall(r'id="([^"]+)"', svg)
        assert len(ids) == len(set(ids))


class TestHighlightClasses:
    def test_focus_and_dim_classes(self):
        st = line_state()
        marks = tuple((i, "focus") if i < 5 else (i, "dim") for i in range(15))
        svg = render_svg(dataclasses.replace(st, highlights=marks))
        assert 'class="focus"' in svg
        assert 'class="dim"' in svg

    def test_unhighlighted_render_has_no_dim(self):
        assert 'class="dim"' not in render_svg(line_state())


class TestAnnotationsAndDerived:
    def test_horizontal_guideline(self):
        st = line_state()
        ann = Annotation(text="average: 12.0", x=None, y=12.0, guideline="horizontal")
        svg = render_svg(dataclasses.replace(st, annotations=(ann,)))
        assert 'class="guideline"' in svg
        assert "average: 12.0" in svg

    def test_point_annotation_text_escapes_xml(self):
        st = line_state()
        ann = Annotation(text="peak <2022>", x="2022", y=14.0, guideline=None)
        svg = render_svg(dataclasses.replace(st, annotations=(ann,)))
        assert "peak &lt;2022&gt;" in svg

    def test_derived_series_renders_dashed(self):
        st = line_state()
        ds = DerivedSeries(
            name="combined",
            rows=tuple({"time": str(y), "consumption": 30.0} for y in range(2018, 2023)),
            provenance="derivation",
        )
        st = dataclasses.replace(
            st, derived=(ds,), visible=frozenset(set(st.visible) | set(range(15, 20)))
        )
        svg = render_svg(st)
        assert stable_id("combined", "series") in svg
        assert "stroke-dasharray" in svg
        assert ">combined<" in svg  # legend entry

    def test_rank_labels_on_bars(self):
        st = bar_state()
        ranks = DerivedSeries(
            name="standings",
            rows=(
                {"category": "tech", "rank": 1},
                {"category": "banking", "rank": 2},
                {"category": "retail", "rank": 3},
            ),
            provenance="derivation",
            kind="rank",
        )
        svg = render_svg(dataclasses.replace(st, derived=(ranks,)))
        assert "#1" in svg and "#3" in svg


class TestLayoutModes:
    def test_stacked_area_extends_y_to_composite_top(self):
        st = line_state()
        stacked = dataclasses.replace(st, mark="area", stacked=True)
        svg = render_svg(stacked)
        minidom.parseString(svg)
        # composite top is ~36; a tick at or above 30 only appears stacked
        assert ">40<" in svg or ">35<" in svg or ">30<" in svg

    def test_sorted_bars_follow_sort_key(self):
        st = bar_state()
        by_rev = dataclasses.replace(st, sort_key="revenue", sort_ascending=False)
        svg = render_svg(by_rev)
        order = [m for m in ("tech", "banking", "retail") if m in svg]
        assert svg.index(">tech<") < svg.index(">banking<") < svg.index(">retail<")
        assert order == ["tech", "banking", "retail"]
