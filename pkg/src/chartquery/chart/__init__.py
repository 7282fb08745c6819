"""Chart documents, live chart state, row selection, and SVG rendering."""

from .model import (
    Annotation,
    Attribute,
    ChannelBinding,
    ChartSpec,
    ChartState,
    DerivedSeries,
    Encodings,
    data_extent,
    initial_state,
    load_chart_spec,
    spec_to_json,
    state_hash,
    state_to_json,
    temporal_period,
)
from .resolve import Resolution, resolve_attribute, resolve_channel_refs
from .query import query_rows, eval_aggregate
from .svg import render_svg

__all__ = [
    "Annotation",
    "Attribute",
    "ChannelBinding",
    "ChartSpec",
    "ChartState",
    "DerivedSeries",
    "Encodings",
    "Resolution",
    "data_extent",
    "eval_aggregate",
    "initial_state",
    "load_chart_spec",
    "query_rows",
    "render_svg",
    "resolve_attribute",
    "resolve_channel_refs",
    "spec_to_json",
    "state_hash",
    "state_to_json",
    "temporal_period",
]
