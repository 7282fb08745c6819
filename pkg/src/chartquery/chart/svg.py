"""Deterministic SVG rendering of chart state.

The same state always renders to the same bytes: element order follows
the spec's declaration order, floats are formatted to fixed precision,
and element ids are content hashes of (series, position), so a mark
keeps its id across frames and a UI can tween matching elements.
"""

from __future__ import annotations

import hashlib
from xml.sax.saxutils import escape

from .model import Attribute, ChartState, temporal_period

WIDTH, HEIGHT = 840, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 170, 44, 56
PLOT_W = WIDTH - MARGIN_L - MARGIN_R
PLOT_H = HEIGHT - MARGIN_T - MARGIN_B

PALETTE = (
    "#4e79a7",
    "#f28e2b",
    "#e15759",
    "#76b7b2",
    "#59a14b",
    "#edc948",
    "#b07aa1",
    "#ff9da7",
    "#9c755f",
    "#bab0ab",
)

# CSS color keywords that channel bindings commonly use.
_CSS_COLORS = {
    "red", "green", "blue", "orange", "purple", "brown", "pink", "gray",
    "grey", "black", "cyan", "magenta", "yellow", "teal", "navy", "maroon",
    "olive", "lime", "aqua", "silver", "gold", "indigo", "violet", "coral",
}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def stable_id(series: str, position: str = "", extra: str = "") -> str:
    key = f"{series}\x1f{position}\x1f{extra}"
    return "el" + hashlib.sha1(key.encode("utf-8")).hexdigest()[:10]


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(count, 1)
    mag = 10 ** int(f"{raw:e}".split("e")[1])
    for mult in (1, 2, 5, 10):
        step = mult * mag
        if step >= raw:
            break
    first = step * (int(lo / step) if lo % step == 0 else int(lo // step) + 1)
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 10))
        t += step
    return ticks or [lo]


def _format_tick(v: float) -> str:
    if abs(v) >= 1_000_000:
        return f"{v / 1_000_000:g}M"
    if abs(v) >= 10_000:
        return f"{v / 1000:g}k"
    if v == int(v):
        return str(int(v))
    return f"{v:g}"


def _ordinal_label(o: int, granularity: str) -> str:
    import datetime

    d = datetime.date.fromordinal(int(o))
    if granularity == "year":
        return str(d.year)
    if granularity == "quarter":
        return f"{d.year}Q{(d.month - 1) // 3 + 1}"
    return d.isoformat()


def series_display_order(state: ChartState) -> list[str]:
    """Visible base categories in render order, then derived data series.

    A sort rearrangement orders categories by their per-category total
    of the sort key over visible rows; ties and the default order follow
    the spec's choice declaration.
    """
    spec = state.spec
    cat = spec.categorical()
    names: list[str] = []
    if cat is not None:
        present = {row[cat.name] for _, row, s in state.visible_rows() if s is None}
        names = [c for c in cat.choices if c in present]
        if state.sort_key:
            totals: dict[str, float] = {c: 0.0 for c in names}
            for _, row, s in state.visible_rows():
                if s is None and row[cat.name] in totals:
                    v = row.get(state.sort_key)
                    if isinstance(v, (int, float)) and not isinstance(v, bool):
                        totals[row[cat.name]] += float(v)
            # Stable sort: equal totals keep the declaration order either way.
            names.sort(key=lambda c: totals[c], reverse=not state.sort_ascending)
    elif state.visible_rows():
        names = ["all"]
    names.extend(d.name for d in state.derived if d.kind == "data")
    return names


def category_totals(state: ChartState, key: str) -> dict[str, float]:
    """Per-category sum of one attribute over visible base rows."""
    cat = state.spec.categorical()
    totals: dict[str, float] = {}
    if cat is None:
        return totals
    for _, row, series in state.visible_rows():
        if series is not None:
            continue
        v = row.get(key)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            totals[row[cat.name]] = totals.get(row[cat.name], 0.0) + float(v)
    return totals


def _series_rows(state: ChartState) -> dict[str, list[tuple[int, dict]]]:
    """Visible rows grouped by series (category or derived name)."""
    spec = state.spec
    cat = spec.categorical()
    out: dict[str, list[tuple[int, dict]]] = {}
    for idx, row, series in state.visible_rows():
        name = series if series is not None else (row[cat.name] if cat else "all")
        out.setdefault(name, []).append((idx, row))
    t_attr = spec.temporal()
    if t_attr is not None:
        for rows in out.values():
            rows.sort(key=lambda ir: temporal_period(str(ir[1].get(t_attr.name, "2000")))[0])
    return out


def _series_colors(state: ChartState, order: list[str]) -> dict[str, str]:
    colors: dict[str, str] = {}
    derived_names = {d.name for d in state.derived if d.kind == "data"}
    for b in state.spec.bindings:
        if b.channel == "color":
            value = b.value.casefold()
            colors[b.choice] = value if value in _CSS_COLORS else value
    palette_i = 0
    for name in order:
        if name in colors:
            continue
        if name in derived_names:
            colors[name] = "#222222"
        else:
            colors[name] = PALETTE[palette_i % len(PALETTE)]
            palette_i += 1
    return colors


def _series_class(state: ChartState, rows: list[tuple[int, dict]]) -> str:
    hmap = state.highlight_map()
    marks = [hmap.get(idx) for idx, _ in rows]
    if marks and all(m == "focus" for m in marks):
        return "focus"
    if marks and all(m == "dim" for m in marks):
        return "dim"
    if any(m == "focus" for m in marks):
        return "focus"
    return ""


def stack_tops(state: ChartState) -> dict[str, float]:
    """Composite top per x position when base series are stacked."""
    spec = state.spec
    t_attr = spec.temporal()
    y_name = spec.encodings.y
    tops: dict[str, float] = {}
    for _, row, series in state.visible_rows():
        if series is not None:
            continue
        key = str(row[t_attr.name]) if t_attr else "all"
        v = row.get(y_name)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            tops[key] = tops.get(key, 0.0) + float(v)
    return tops


def _x_scale_temporal(state: ChartState):
    t_attr = state.spec.temporal()
    assert t_attr is not None
    if state.x_domain is not None:
        lo = temporal_period(state.x_domain[0])[0]
        hi = temporal_period(state.x_domain[1])[1]
    else:
        periods = [
            temporal_period(str(row[t_attr.name]))
            for _, row, _s in state.visible_rows()
            if t_attr.name in row
        ]
        lo = min(p[0] for p in periods) if periods else 0
        hi = max(p[1] for p in periods) if periods else 1
    span = max(hi - lo, 1)

    def scale(text: str) -> float:
        p = temporal_period(text)
        mid = (p[0] + p[1]) / 2
        return MARGIN_L + (mid - lo) / span * PLOT_W

    return scale, lo, hi


def _y_extent(state: ChartState) -> tuple[float, float]:
    lo, hi = state.y_domain if state.y_domain else (0.0, 1.0)
    if state.stacked:
        tops = stack_tops(state)
        if tops:
            hi = max(hi, max(tops.values()))
    if state.mark in ("bar", "area"):
        lo = min(lo, 0.0)
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def _y_scale(state: ChartState):
    lo, hi = _y_extent(state)

    def scale(v: float) -> float:
        return MARGIN_T + PLOT_H - (v - lo) / (hi - lo) * PLOT_H

    return scale, lo, hi


def _rank_labels(state: ChartState) -> dict[str, int]:
    for d in state.derived:
        if d.kind == "rank":
            return {
                str(row.get("category")): int(row.get("rank", 0)) for row in d.rows
            }
    return {}


def render_svg(state: ChartState) -> str:
    """Render chart state to standalone SVG 1.1 markup."""
    spec = state.spec
    order = series_display_order(state)
    groups = _series_rows(state)
    colors = _series_colors(state, order)
    y_scale, y_lo, y_hi = _y_scale(state)
    t_attr = spec.temporal()
    y_name = spec.encodings.y
    derived_names = {d.name for d in state.derived if d.kind == "data"}

    parts: list[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    parts.append(
        "<style>"
        "text{font-family:Helvetica,Arial,sans-serif;font-size:12px;fill:#333}"
        ".title{font-size:15px;font-weight:bold}"
        ".focus{opacity:1}"
        ".dim{opacity:0.22}"
        ".axis{stroke:#888;stroke-width:1}"
        ".gridline{stroke:#ddd;stroke-width:1}"
        ".guideline{stroke:#d62728;stroke-width:1.2;stroke-dasharray:5 3}"
        ".annotation{font-size:12px;font-weight:bold;fill:#b22222}"
        ".ranklabel{font-size:11px;font-weight:bold;fill:#222}"
        "</style>"
    )
    parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    if spec.title:
        parts.append(
            f'<text class="title" x="{MARGIN_L}" y="24">{escape(spec.title)}</text>'
        )

    # Axes and y ticks / gridlines.
    bottom = MARGIN_T + PLOT_H
    parts.append(
        f'<line class="axis" x1="{MARGIN_L}" y1="{bottom}" x2="{MARGIN_L + PLOT_W}" y2="{bottom}"/>'
    )
    parts.append(
        f'<line class="axis" x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{bottom}"/>'
    )
    for tick in _nice_ticks(y_lo, y_hi):
        ty = y_scale(tick)
        parts.append(
            f'<line class="gridline" x1="{MARGIN_L}" y1="{_fmt(ty)}" '
            f'x2="{MARGIN_L + PLOT_W}" y2="{_fmt(ty)}"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 8}" y="{_fmt(ty + 4)}" text-anchor="end">'
            f"{escape(_format_tick(tick))}</text>"
        )

    band_centers: dict[str, float] = {}
    if state.mark == "bar" or t_attr is None:
        # Band layout over categories (and derived bars appended).
        bands = order
        n = max(len(bands), 1)
        step = PLOT_W / n
        for i, name in enumerate(bands):
            band_centers[name] = MARGIN_L + step * (i + 0.5)
            label = name if len(name) <= 14 else name[:13] + "…"
            parts.append(
                f'<text x="{_fmt(band_centers[name])}" y="{bottom + 18}" '
                f'text-anchor="middle">{escape(label)}</text>'
            )
    else:
        x_scale, x_lo, x_hi = _x_scale_temporal(state)
        span = max(x_hi - x_lo, 1)
        for i in range(6):
            o = x_lo + span * i / 5
            px = MARGIN_L + PLOT_W * i / 5
            parts.append(
                f'<line class="axis" x1="{_fmt(px)}" y1="{bottom}" x2="{_fmt(px)}" y2="{bottom + 5}"/>'
            )
            parts.append(
                f'<text x="{_fmt(px)}" y="{bottom + 20}" text-anchor="middle">'
                f"{escape(_ordinal_label(o, t_attr.granularity or 'date'))}</text>"
            )

    # Marks.
    rank_by_cat = _rank_labels(state)
    if state.mark == "bar":
        qs = [a for a in spec.quantitatives()]
        multi_q = len(qs) >= 2 and not derived_names
        for name in order:
            rows = groups.get(name, [])
            if not rows:
                continue
            cls = _series_class(state, rows)
            center = band_centers.get(name, MARGIN_L + PLOT_W / 2)
            items: list[tuple[str, float, str]] = []
            for idx, row in rows:
                position = str(row.get(t_attr.name, "")) if t_attr else ""
                if multi_q and name not in derived_names:
                    for q in qs:
                        v = row.get(q.name)
                        if isinstance(v, (int, float)) and not isinstance(v, bool):
                            items.append((f"{position}|{q.name}", float(v), q.name))
                else:
                    v = row.get(y_name)
                    if isinstance(v, (int, float)) and not isinstance(v, bool):
                        items.append((position, float(v), y_name))
            if not items:
                continue
            n = len(items)
            band_w = PLOT_W / max(len(order), 1) * 0.72
            bar_w = band_w / n
            zero_y = y_scale(max(0.0, y_lo))
            for j, (position, v, qname) in enumerate(items):
                bx = center - band_w / 2 + j * bar_w
                by = y_scale(v)
                top, hgt = (by, zero_y - by) if by <= zero_y else (zero_y, by - zero_y)
                mid = stable_id(name, position, qname)
                cls_attr = f' class="{cls}"' if cls else ""
                parts.append(
                    f'<rect id="{mid}"{cls_attr} x="{_fmt(bx)}" y="{_fmt(top)}" '
                    f'width="{_fmt(bar_w * 0.92)}" height="{_fmt(hgt)}" '
                    f'fill="{colors[name]}"/>'
                )
            if name in rank_by_cat:
                label_y = y_scale(max(it[1] for it in items)) - 6
                parts.append(
                    f'<text id="{stable_id(name, "rank")}" class="ranklabel" '
                    f'x="{_fmt(center)}" y="{_fmt(label_y)}" text-anchor="middle">'
                    f"#{rank_by_cat[name]}</text>"
                )
    else:
        x_scale, _, _ = _x_scale_temporal(state)
        zero_y = y_scale(max(0.0, y_lo))
        offsets: dict[str, float] = {}
        for name in order:
            rows = groups.get(name, [])
            if not rows or t_attr is None:
                continue
            cls = _series_class(state, rows)
            cls_attr = f' class="{cls}"' if cls else ""
            is_derived = name in derived_names
            pts: list[tuple[float, float, float]] = []  # (x, y_top, y_base)
            for idx, row in rows:
                ts = str(row[t_attr.name])
                v = row.get(y_name)
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    continue
                px = x_scale(ts)
                if state.stacked and not is_derived:
                    base = offsets.get(ts, 0.0)
                    offsets[ts] = base + float(v)
                    pts.append((px, y_scale(base + float(v)), y_scale(base)))
                else:
                    pts.append((px, y_scale(float(v)), zero_y))
            if not pts:
                continue
            sid = stable_id(name, "series")
            if state.mark == "area" or (state.stacked and not is_derived):
                upper = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y, _ in pts)
                lower = " ".join(f"{_fmt(x)},{_fmt(b)}" for x, _, b in reversed(pts))
                dash = ' stroke-dasharray="6 3"' if is_derived else ""
                parts.append(
                    f'<path id="{sid}"{cls_attr} d="M{upper} L{lower} Z" '
                    f'fill="{colors[name]}" fill-opacity="0.75" stroke="{colors[name]}"{dash}/>'
                )
            else:
                d = "M" + " L".join(f"{_fmt(x)},{_fmt(y)}" for x, y, _ in pts)
                dash = ' stroke-dasharray="6 3"' if is_derived else ""
                parts.append(
                    f'<path id="{sid}"{cls_attr} d="{d}" fill="none" '
                    f'stroke="{colors[name]}" stroke-width="2"{dash}/>'
                )

    # Annotations: text labels with optional guidelines.
    for i, a in enumerate(state.annotations):
        ax: float
        if a.x is not None and band_centers:
            ax = band_centers.get(a.x, MARGIN_L + PLOT_W / 2)
        elif a.x is not None and t_attr is not None:
            x_scale, _, _ = _x_scale_temporal(state)
            ax = x_scale(a.x)
        else:
            ax = MARGIN_L + PLOT_W - 6
        ay = y_scale(a.y) if a.y is not None else MARGIN_T + 14 + 16 * i
        if a.guideline == "horizontal" and a.y is not None:
            parts.append(
                f'<line class="guideline" x1="{MARGIN_L}" y1="{_fmt(ay)}" '
                f'x2="{MARGIN_L + PLOT_W}" y2="{_fmt(ay)}"/>'
            )
        if a.guideline == "vertical" and a.x is not None:
            parts.append(
                f'<line class="guideline" x1="{_fmt(ax)}" y1="{MARGIN_T}" '
                f'x2="{_fmt(ax)}" y2="{bottom}"/>'
            )
        # Labels sit above and to the right of their anchor; a second label
        # on the same anchor nudges down by a fixed amount, so placement is
        # a pure function of the annotation list.
        anchor = "end" if ax > MARGIN_L + PLOT_W * 0.8 else "start"
        tx = ax - 6 if anchor == "end" else ax + 6
        collisions = sum(
            1 for b in state.annotations[:i] if b.x == a.x and b.y == a.y
        )
        ty = min(bottom - 4, max(MARGIN_T + 12, ay - 8 + 14 * collisions))
        parts.append(
            f'<text id="ann{i}" class="annotation" x="{_fmt(tx)}" y="{_fmt(ty)}" '
            f'text-anchor="{anchor}">{escape(a.text)}</text>'
        )

    # Legend.
    lx = MARGIN_L + PLOT_W + 16
    for i, name in enumerate(order):
        rows = groups.get(name, [])
        cls = _series_class(state, rows) if rows else ""
        cls_attr = f' class="{cls}"' if cls else ""
        ly = MARGIN_T + 8 + i * 20
        label = name if len(name) <= 18 else name[:17] + "…"
        parts.append(
            f'<g{cls_attr}><rect x="{lx}" y="{ly}" width="12" height="12" '
            f'fill="{colors[name]}"/>'
            f'<text x="{lx + 18}" y="{ly + 10}">{escape(label)}</text></g>'
        )

    parts.append("</svg>")
    return "".join(parts)
