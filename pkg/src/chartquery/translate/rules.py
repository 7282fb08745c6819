"""Rule-based translation from chart questions to tasks.

The pipeline runs in fixed stages: operation detection, mention
extraction (attributes, choices, channel phrases, derived-series
anaphora), filter extraction (time, thresholds, extremes, ranks), and
kind-specific assembly.  Stages communicate through character spans so
every extracted piece can be traced back to the query text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..chart.model import Attribute, ChartSpec, ChartState
from ..errors import UnparseableQuery
from ..taskir import (
    AggregateSpec,
    AggregateValue,
    AttributeRef,
    Channel,
    DeriveSpec,
    Direction,
    Filter,
    FilterOp,
    ListValue,
    Literal,
    RangeValue,
    Task,
    TaskKind,
    canonicalize,
    validate,
)
from ..taskir.grammar import serialize_filter
from .base import TextSpan, Translation
from .lexicon import (
    DATE_RE,
    MAX_WORDS,
    MIN_WORDS,
    NUMBER_RE,
    ORDINAL_WORDS,
    QUARTER_RE,
    SERIES_NOUNS,
    YEAR_RE,
    normalize_number,
    parse_count,
    pluralize,
)

_GT_WORDS = (
    "more than",
    "greater than",
    "higher than",
    "at least",
    "above",
    "over",
    "exceeding",
    "exceeds",
    "exceeded",
)
_LT_WORDS = ("less than", "fewer than", "lower than", "at most", "below", "under")

_INTERROGATIVES = ("what", "which", "when", "who", "how", "where", "show", "tell")


def detect_operation(text: str) -> TaskKind:
    """Classify the analysis operation from wording alone.

    Pattern precedence is fixed: comparison words beat aggregation words
    beat summation words beat trend words; an extreme-value question
    ("what is the highest ...") reads as aggregation; any remaining
    interrogative is identification.
    """
    t = text.lower()
    # "above the average" is a threshold, not a request for the average
    t = re.sub(
        rf"\b({'|'.join(_GT_WORDS + _LT_WORDS)})\s+(?:the\s+)?(average|mean)\b",
        " ",
        t,
    )
    if re.search(r"\b(difference|gap|compar\w*|versus|vs\.?)\b", t):
        return TaskKind.COMPARE
    if re.search(r"\b(average|mean)\b", t):
        return TaskKind.AGGREGATE
    if re.search(r"\b(sum|combined|total|altogether)\b", t):
        return TaskKind.SUM
    if re.search(r"\b(trend\w*|change over|changed over|evolve\w*|develop over)\b", t):
        return TaskKind.TREND
    if re.match(
        rf"\s*what\s+(?:is|was|are|were)\s+the\s+(?:{'|'.join(MAX_WORDS + MIN_WORDS)})\b",
        t,
    ) and not re.search(rf"\b({'|'.join(ORDINAL_WORDS)})\b", t):
        return TaskKind.AGGREGATE
    first = re.match(r"\s*([a-z']+)", t)
    if (first and first.group(1) in _INTERROGATIVES) or "?" in t:
        return TaskKind.IDENTIFY
    raise UnparseableQuery(
        f"query {text!r} does not look like a chart analysis question"
    )


@dataclass
class Mention:
    start: int
    end: int
    kind: str  # choice | attribute | channel | mixed | derived
    attr: Attribute | None = None
    choice: str | None = None
    channel_value: str | None = None
    series: str | None = None

    def span(self, text: str) -> TextSpan:
        return TextSpan.of(text, self.start, self.end)


class _Consumed:
    """Character ranges already claimed by an extraction stage."""

    def __init__(self) -> None:
        self.ranges: list[tuple[int, int]] = []

    def overlaps(self, start: int, end: int) -> bool:
        return any(s < end and start < e for s, e in self.ranges)

    def claim(self, start: int, end: int) -> None:
        self.ranges.append((start, end))


def _find_mentions(
    text: str, spec: ChartSpec, prior: ChartState | None, consumed: _Consumed
) -> list[Mention]:
    low = text.lower()
    mentions: list[Mention] = []
    colors = sorted(
        {b.value.lower() for b in spec.bindings if b.channel == "color"},
        key=len,
        reverse=True,
    )
    color_alt = "|".join(re.escape(c) for c in colors) if colors else None

    choice_surfaces: list[tuple[str, Attribute, str]] = []
    attr_surfaces: list[tuple[str, Attribute]] = []
    for attr in spec.attributes:
        for s in (attr.name, *attr.synonyms):
            attr_surfaces.append((s.lower(), attr))
            attr_surfaces.append((pluralize(s.lower()), attr))
        if attr.type == "categorical":
            for c in attr.choices:
                choice_surfaces.append((c.lower(), attr, c))

    def claim(m: Mention) -> None:
        consumed.claim(m.start, m.end)
        mentions.append(m)

    # Derived-series anaphora and literal names bind first: a series named
    # "sum of coal and gas" must not decompose into its parts.
    if prior is not None:
        data_series = [d for d in prior.derived if d.kind == "data"]
        for d in sorted(data_series, key=lambda d: len(d.name), reverse=True):
            for m in re.finditer(re.escape(d.name.lower()), low):
                if not consumed.overlaps(m.start(), m.end()):
                    claim(Mention(m.start(), m.end(), "derived", series=d.name))
        if data_series:
            latest = data_series[-1].name
            for m in re.finditer(
                r"\b(?:that|this|the)\s+(?:sum|total|combination|combined series|"
                r"difference|gap|derived series)\b",
                low,
            ):
                if not consumed.overlaps(m.start(), m.end()):
                    claim(Mention(m.start(), m.end(), "derived", series=latest))

    if color_alt:
        choice_alt = "|".join(
            re.escape(c) for c, _, _ in sorted(choice_surfaces, key=lambda t: -len(t[0]))
        )
        noun_alt = "|".join(SERIES_NOUNS)
        if choice_alt:
            for m in re.finditer(
                rf"\b(?:the\s+)?({color_alt})\s+({choice_alt})(?:\s+(?:{noun_alt}))?\b",
                low,
            ):
                if consumed.overlaps(m.start(), m.end()):
                    continue
                surface = m.group(2)
                owner = next(
                    (a, c) for s, a, c in choice_surfaces if s == surface
                )
                claim(
                    Mention(
                        m.start(),
                        m.end(),
                        "mixed",
                        attr=owner[0],
                        choice=owner[1],
                        channel_value=m.group(1),
                    )
                )
        for m in re.finditer(
            rf"\b(?:the\s+)?({color_alt})\s+(?:{noun_alt})s?\b", low
        ):
            if not consumed.overlaps(m.start(), m.end()):
                claim(
                    Mention(m.start(), m.end(), "channel", channel_value=m.group(1))
                )

    for surface, attr, choice in sorted(choice_surfaces, key=lambda t: -len(t[0])):
        for m in re.finditer(rf"(?<![\w]){re.escape(surface)}(?![\w])", low):
            if not consumed.overlaps(m.start(), m.end()):
                claim(Mention(m.start(), m.end(), "choice", attr=attr, choice=choice))

    for surface, attr in sorted(attr_surfaces, key=lambda t: -len(t[0])):
        for m in re.finditer(rf"(?<![\w]){re.escape(surface)}(?![\w])", low):
            if not consumed.overlaps(m.start(), m.end()):
                claim(Mention(m.start(), m.end(), "attribute", attr=attr))

    mentions.sort(key=lambda m: m.start)
    return mentions


@dataclass
class _SpannedFilter:
    filter: Filter
    span: TextSpan | None


def _extract_rank(
    text: str, consumed: _Consumed
) -> tuple[Filter, Direction, TextSpan] | None:
    low = text.lower()
    count_alt = r"\d+|two|three|four|five|six|seven|eight|nine|ten"
    direction: Direction | None = None
    k: int | None = None
    op = FilterOp.LT
    m = re.search(rf"\b(top|bottom)\s+({count_alt})\b", low)
    if m:
        direction = Direction.TOP if m.group(1) == "top" else Direction.BOTTOM
        k = parse_count(m.group(2))
        op = FilterOp.LT
    if m is None:
        m = re.search(
            rf"\b(largest|biggest|highest|greatest|smallest|lowest)\s+({count_alt})\b",
            low,
        )
        if m:
            direction = (
                Direction.BOTTOM
                if m.group(1) in ("smallest", "lowest")
                else Direction.TOP
            )
            k = parse_count(m.group(2))
            op = FilterOp.LT
    if m is None:
        ord_alt = "|".join(ORDINAL_WORDS)
        sup_alt = "|".join(MAX_WORDS + MIN_WORDS)
        m = re.search(rf"\b({ord_alt})\s+({sup_alt})\b", low)
        if m:
            direction = (
                Direction.BOTTOM if m.group(2) in MIN_WORDS else Direction.TOP
            )
            k = ORDINAL_WORDS[m.group(1)]
            op = FilterOp.EQ
    if m is None or direction is None or k is None:
        return None
    consumed.claim(m.start(), m.end())
    f = Filter(AttributeRef.by_name("rank"), op, Literal(str(k)), direction)
    return f, direction, TextSpan.of(text, m.start(), m.end())


def _extract_thresholds(
    text: str, q_name: str, consumed: _Consumed
) -> list[_SpannedFilter]:
    low = text.lower()
    out: list[_SpannedFilter] = []
    word_alt = "|".join(_GT_WORDS + _LT_WORDS)
    for m in re.finditer(
        rf"\b({word_alt})\s+(?:the\s+)?(average|mean)\b", low
    ):
        if consumed.overlaps(m.start(), m.end()):
            continue
        consumed.claim(m.start(), m.end())
        op = FilterOp.GT if m.group(1) in _GT_WORDS else FilterOp.LT
        agg = AggregateValue(AggregateSpec("avg", AttributeRef.by_name(q_name)))
        out.append(
            _SpannedFilter(
                Filter(AttributeRef.by_name(q_name), op, agg),
                TextSpan.of(text, m.start(), m.end()),
            )
        )
    for m in re.finditer(rf"\b({word_alt})\s+({NUMBER_RE.pattern})", low):
        if consumed.overlaps(m.start(), m.end()):
            continue
        consumed.claim(m.start(), m.end())
        op = FilterOp.GT if m.group(1) in _GT_WORDS else FilterOp.LT
        out.append(
            _SpannedFilter(
                Filter(
                    AttributeRef.by_name(q_name),
                    op,
                    Literal(normalize_number(m.group(2))),
                ),
                TextSpan.of(text, m.start(), m.end()),
            )
        )
    return out


def _extract_extreme(
    text: str, q_name: str, consumed: _Consumed
) -> _SpannedFilter | None:
    low = text.lower()
    for words, op in ((MAX_WORDS, "max"), (MIN_WORDS, "min")):
        for m in re.finditer(rf"\b({'|'.join(words)})\b", low):
            if consumed.overlaps(m.start(), m.end()):
                continue
            consumed.claim(m.start(), m.end())
            agg = AggregateValue(AggregateSpec(op, AttributeRef.by_name(q_name)))
            return _SpannedFilter(
                Filter(AttributeRef.by_name(q_name), FilterOp.EQ, agg),
                TextSpan.of(text, m.start(), m.end()),
            )
    return None


def _time_tokens(text: str, consumed: _Consumed) -> list[tuple[int, int, str]]:
    tokens: list[tuple[int, int, str]] = []
    local = _Consumed()
    for m in DATE_RE.finditer(text):
        if not consumed.overlaps(m.start(), m.end()):
            tokens.append((m.start(), m.end(), m.group(0)))
            local.claim(m.start(), m.end())
    for m in QUARTER_RE.finditer(text):
        if consumed.overlaps(m.start(), m.end()) or local.overlaps(m.start(), m.end()):
            continue
        if m.group(1):
            tok = f"{m.group(1)}Q{m.group(2)}"
        else:
            tok = f"{m.group(4)}Q{m.group(3)}"
        tokens.append((m.start(), m.end(), tok))
        local.claim(m.start(), m.end())
    for m in YEAR_RE.finditer(text):
        if consumed.overlaps(m.start(), m.end()) or local.overlaps(m.start(), m.end()):
            continue
        tokens.append((m.start(), m.end(), m.group(0)))
    tokens.sort()
    return tokens


def _extract_time_filters(
    text: str, t_name: str, consumed: _Consumed
) -> list[_SpannedFilter]:
    tokens = _time_tokens(text, consumed)
    low = text.lower()
    out: list[_SpannedFilter] = []
    used = [False] * len(tokens)
    for i in range(len(tokens) - 1):
        if used[i] or used[i + 1]:
            continue
        s1, e1, t1 = tokens[i]
        s2, e2, t2 = tokens[i + 1]
        gap = low[e1:s2]
        pre = low[max(0, s1 - 16) : s1]
        is_range = bool(re.fullmatch(r"\s*(?:to|until|through|-|–)\s*", gap)) or (
            re.fullmatch(r"\s*and\s*", gap) and "between" in pre
        )
        if not is_range:
            continue
        used[i] = used[i + 1] = True
        consumed.claim(s1, e2)
        out.append(
            _SpannedFilter(
                Filter(
                    AttributeRef.by_name(t_name),
                    FilterOp.IN_RANGE,
                    RangeValue(Literal(t1), Literal(t2)),
                ),
                TextSpan.of(text, s1, e2),
            )
        )
    for i, (s, e, tok) in enumerate(tokens):
        if used[i]:
            continue
        consumed.claim(s, e)
        out.append(
            _SpannedFilter(
                Filter(AttributeRef.by_name(t_name), FilterOp.EQ, Literal(tok)),
                TextSpan.of(text, s, e),
            )
        )
    return out


def _among_span(text: str) -> tuple[int, int] | None:
    m = re.search(r"\bamong\b", text.lower())
    if not m:
        return None
    tail = text.lower()[m.end() :]
    stop = re.search(r",?\s+(which|what|who)\b|\?", tail)
    end = m.end() + (stop.start() if stop else len(tail))
    return m.start(), end


class RulesTranslator:
    """Deterministic pattern translator; needs no network."""

    name = "rules"

    def translate(
        self,
        text: str,
        spec: ChartSpec,
        prior: ChartState | None = None,
    ) -> Translation:
        if not text or not text.strip():
            raise UnparseableQuery("empty query")
        kind = detect_operation(text)
        consumed = _Consumed()
        mentions = _find_mentions(text, spec, prior, consumed)

        q_attr = next(
            (m.attr for m in mentions if m.kind == "attribute" and m.attr.type == "quantitative"),
            None,
        )
        derived_mention = next((m for m in mentions if m.kind == "derived"), None)
        q_name = q_attr.name if q_attr is not None else spec.encodings.y
        if derived_mention is not None and q_attr is None:
            q_name = derived_mention.series

        filter_consumed = _Consumed()
        for s, e in consumed.ranges:
            filter_consumed.claim(s, e)

        rank = _extract_rank(text, filter_consumed)
        thresholds = _extract_thresholds(text, q_name, filter_consumed)
        extreme = None if rank else _extract_extreme(text, q_name, filter_consumed)
        t_attr = spec.temporal()
        time_filters = (
            _extract_time_filters(text, t_attr.name, filter_consumed) if t_attr else []
        )

        builder = {
            TaskKind.IDENTIFY: self._build_identify,
            TaskKind.AGGREGATE: self._build_aggregate,
            TaskKind.TREND: self._build_trend,
            TaskKind.SUM: self._build_sum,
            TaskKind.COMPARE: self._build_compare,
        }[kind]
        task, ledger = builder(
            text=text,
            spec=spec,
            mentions=mentions,
            rank=rank,
            thresholds=thresholds,
            extreme=extreme,
            time_filters=time_filters,
            q_name=q_name,
            derived_mention=derived_mention,
        )
        violations = validate(task)
        if violations:
            path, msg = violations[0]
            raise UnparseableQuery(f"query mapped to an invalid task ({path}: {msg})")
        task = canonicalize(task)
        spans = _assign_spans(task, ledger)
        return Translation(task=task, spans=spans, query=text, backend=self.name)

    # -- assembly ------------------------------------------------------

    def _referent_filters(
        self, text: str, spec: ChartSpec, mentions: list[Mention]
    ) -> list[_SpannedFilter]:
        """Choice, channel, and list filters for identification-family tasks."""
        out: list[_SpannedFilter] = []
        among = _among_span(text)
        choice_mentions = [m for m in mentions if m.kind == "choice"]
        channel_mentions = [m for m in mentions if m.kind in ("channel", "mixed")]
        if among:
            inside = [
                m for m in choice_mentions if among[0] <= m.start and m.end <= among[1]
            ]
            if len(inside) >= 2:
                attr = inside[0].attr
                items = tuple(Literal(m.choice) for m in inside)
                out.append(
                    _SpannedFilter(
                        Filter(AttributeRef.by_name(attr.name), FilterOp.EQ, ListValue(items)),
                        TextSpan.of(text, among[0], among[1]),
                    )
                )
                choice_mentions = [m for m in choice_mentions if m not in inside]
        if len(choice_mentions) == 1:
            m = choice_mentions[0]
            out.append(
                _SpannedFilter(
                    Filter(AttributeRef.by_name(m.attr.name), FilterOp.EQ, Literal(m.choice)),
                    m.span(text),
                )
            )
        elif len(choice_mentions) >= 2:
            attr = choice_mentions[0].attr
            items = tuple(Literal(m.choice) for m in choice_mentions)
            span = TextSpan.of(text, choice_mentions[0].start, choice_mentions[-1].end)
            out.append(
                _SpannedFilter(
                    Filter(AttributeRef.by_name(attr.name), FilterOp.EQ, ListValue(items)),
                    span,
                )
            )
        for m in channel_mentions:
            if m.kind == "mixed":
                out.append(
                    _SpannedFilter(
                        Filter(
                            AttributeRef.by_name(m.attr.name), FilterOp.EQ, Literal(m.choice)
                        ),
                        m.span(text),
                    )
                )
            else:
                out.append(
                    _SpannedFilter(
                        Filter(
                            AttributeRef.by_channel(Channel.COLOR, m.channel_value),
                            FilterOp.EQ,
                            Literal(m.channel_value),
                        ),
                        m.span(text),
                    )
                )
        return out

    def _target_for_identify(
        self,
        text: str,
        spec: ChartSpec,
        mentions: list[Mention],
        has_rank: bool,
        q_name: str,
    ) -> tuple[AttributeRef | None, TextSpan | None]:
        low = text.lower()
        attr_mentions = [m for m in mentions if m.kind == "attribute"]
        # "which <attr>" or "when": the asked-for attribute is the target
        for m in attr_mentions:
            pre = low[max(0, m.start - 14) : m.start]
            if re.search(r"\b(which|what)\s+(?:the\s+)?$", pre) and m.attr.type in (
                "categorical",
                "temporal",
            ):
                return AttributeRef.by_name(m.attr.name), m.span(text)
        if re.search(r"\bwhen\b", low):
            t = spec.temporal()
            if t is not None:
                return AttributeRef.by_name(t.name), None
        if has_rank:
            cat = spec.categorical()
            if cat is not None:
                return AttributeRef.by_name(cat.name), None
        q_mention = next(
            (
                m
                for m in mentions
                if m.kind == "attribute" and m.attr.type == "quantitative"
            ),
            None,
        )
        if q_mention is not None:
            return AttributeRef.by_name(q_mention.attr.name), q_mention.span(text)
        cat_mention = next(
            (m for m in attr_mentions if m.attr.type == "categorical"), None
        )
        if cat_mention is not None:
            return AttributeRef.by_name(cat_mention.attr.name), cat_mention.span(text)
        return AttributeRef.by_name(q_name), None

    def _build_identify(self, *, text, spec, mentions, rank, thresholds, extreme,
                        time_filters, q_name, derived_mention):
        pairs = self._referent_filters(text, spec, mentions)
        pairs.extend(time_filters)
        pairs.extend(thresholds)
        if extreme:
            pairs.append(extreme)
        derive = None
        derive_span = None
        if rank:
            f, direction, span = rank
            pairs.append(_SpannedFilter(f, span))
            derive = DeriveSpec("rank", (AttributeRef.by_name(q_name),), direction)
            derive_span = span
        target, target_span = self._target_for_identify(
            text, spec, mentions, rank is not None, q_name
        )
        task = Task(
            TaskKind.IDENTIFY,
            target,
            tuple(p.filter for p in pairs),
            derive,
        )
        return task, _Ledger(pairs, target_span, derive_span)

    def _build_aggregate(self, *, text, spec, mentions, rank, thresholds, extreme,
                         time_filters, q_name, derived_mention):
        low = text.lower()
        if re.search(r"\b(average|mean)\b", low):
            op = "avg"
        elif re.search(rf"\b({'|'.join(MIN_WORDS)})\b", low):
            op = "min"
        else:
            op = "max"
        subject = derived_mention.series if derived_mention else q_name
        agg_filter = Filter(
            AttributeRef.by_name(subject),
            FilterOp.EQ,
            AggregateValue(AggregateSpec(op, AttributeRef.by_name(subject))),
        )
        m_op = re.search(rf"\b(average|mean|{'|'.join(MAX_WORDS + MIN_WORDS)})\b", low)
        pairs = [
            _SpannedFilter(
                agg_filter,
                TextSpan.of(text, m_op.start(), m_op.end()) if m_op else None,
            )
        ]
        pairs.extend(self._referent_filters(text, spec, mentions))
        pairs.extend(time_filters)
        pairs.extend(thresholds)
        target_span = derived_mention.span(text) if derived_mention else None
        task = Task(
            TaskKind.AGGREGATE,
            AttributeRef.by_name(subject),
            tuple(p.filter for p in pairs),
        )
        return task, _Ledger(pairs, target_span, None)

    def _build_trend(self, *, text, spec, mentions, rank, thresholds, extreme,
                     time_filters, q_name, derived_mention):
        pairs = self._referent_filters(text, spec, mentions)
        pairs.extend(time_filters)
        q_mention = next(
            (
                m
                for m in mentions
                if m.kind == "attribute" and m.attr.type == "quantitative"
            ),
            None,
        )
        target = None
        target_span = None
        if q_mention is not None:
            target = AttributeRef.by_name(q_mention.attr.name)
            target_span = q_mention.span(text)
        elif derived_mention is not None:
            target = AttributeRef.by_name(derived_mention.series)
            target_span = derived_mention.span(text)
        task = Task(TaskKind.TREND, target, tuple(p.filter for p in pairs))
        return task, _Ledger(pairs, target_span, None)

    def _build_sum(self, *, text, spec, mentions, rank, thresholds, extreme,
                   time_filters, q_name, derived_mention):
        q_mentions = [
            m
            for m in mentions
            if m.kind == "attribute" and m.attr.type == "quantitative"
        ]
        pairs: list[_SpannedFilter] = []
        series_mentions = [
            m for m in mentions if m.kind in ("choice", "channel", "mixed")
        ]
        if len(q_mentions) >= 2:
            # combining two measures of one series: the series selection
            # stays a filter and the measures become operands
            operands = tuple(AttributeRef.by_name(m.attr.name) for m in q_mentions)
            target = None
            pairs.extend(self._referent_filters(text, spec, mentions))
            op_span = TextSpan.of(text, q_mentions[0].start, q_mentions[-1].end)
        else:
            if len(series_mentions) < 2:
                raise UnparseableQuery(
                    "summation needs at least two series or two measures to combine"
                )
            operands = tuple(_operand_ref(m) for m in series_mentions)
            target = AttributeRef.by_name(q_name)
            op_span = TextSpan.of(
                text, series_mentions[0].start, series_mentions[-1].end
            )
        pairs.extend(time_filters)
        pairs.extend(thresholds)
        task = Task(
            TaskKind.SUM,
            target,
            tuple(p.filter for p in pairs),
            DeriveSpec("sum", operands),
        )
        return task, _Ledger(pairs, None, op_span)

    def _build_compare(self, *, text, spec, mentions, rank, thresholds, extreme,
                       time_filters, q_name, derived_mention):
        series_mentions = [
            m for m in mentions if m.kind in ("choice", "channel", "mixed")
        ]
        if len(series_mentions) < 2:
            raise UnparseableQuery("comparison needs two series to compare")
        target = AttributeRef.by_name(q_name)
        subtask_pairs: list[list[_SpannedFilter]] = []
        for m in series_mentions:
            own: list[_SpannedFilter] = [
                _SpannedFilter(_selection_filter(m), m.span(text))
            ]
            own.extend(time_filters)
            subtask_pairs.append(own)
        subtasks = tuple(
            Task(TaskKind.IDENTIFY, target, tuple(p.filter for p in own))
            for own in subtask_pairs
        )
        operands = tuple(_operand_ref(m) for m in series_mentions)
        derive = DeriveSpec("difference", operands[:2]) if len(operands) >= 2 else None
        op_span = TextSpan.of(
            text, series_mentions[0].start, series_mentions[-1].end
        )
        task = Task(TaskKind.COMPARE, target, (), derive, subtasks)
        ledger = _Ledger([], None, op_span)
        ledger.subtask_pairs = subtask_pairs
        return task, ledger


def _selection_filter(m: Mention) -> Filter:
    if m.kind == "channel":
        return Filter(
            AttributeRef.by_channel(Channel.COLOR, m.channel_value),
            FilterOp.EQ,
            Literal(m.channel_value),
        )
    return Filter(AttributeRef.by_name(m.attr.name), FilterOp.EQ, Literal(m.choice))


def _operand_ref(m: Mention) -> AttributeRef:
    if m.kind == "channel":
        return AttributeRef.by_channel(Channel.COLOR, m.channel_value)
    if m.kind == "mixed":
        return AttributeRef.mixed(m.choice, Channel.COLOR, m.channel_value)
    return AttributeRef.by_name(m.choice)


class _Ledger:
    """Raw span bookkeeping carried from assembly to canonical paths."""

    def __init__(
        self,
        pairs: list[_SpannedFilter],
        target_span: TextSpan | None,
        derive_span: TextSpan | None,
    ) -> None:
        self.pairs = pairs
        self.target_span = target_span
        self.derive_span = derive_span
        self.subtask_pairs: list[list[_SpannedFilter]] = []


def _assign_spans(task: Task, ledger: _Ledger) -> dict[str, TextSpan]:
    spans: dict[str, TextSpan] = {}
    if ledger.target_span is not None and task.target is not None:
        spans["target"] = ledger.target_span
    if ledger.derive_span is not None and task.derive is not None:
        spans["derive"] = ledger.derive_span

    def match_filters(
        filters: tuple[Filter, ...], pairs: list[_SpannedFilter], prefix: str
    ) -> None:
        pool: dict[str, list[TextSpan]] = {}
        for p in pairs:
            if p.span is not None:
                pool.setdefault(serialize_filter(p.filter), []).append(p.span)
        for i, f in enumerate(filters):
            candidates = pool.get(serialize_filter(f))
            if candidates:
                spans[f"{prefix}filters[{i}]"] = candidates.pop(0)

    match_filters(task.filters, ledger.pairs, "")
    if ledger.subtask_pairs and task.subtasks:
        # subtasks were sorted during canonicalization; match by content
        remaining = list(ledger.subtask_pairs)
        for j, sub in enumerate(task.subtasks):
            serialized = {serialize_filter(f) for f in sub.filters}
            best = None
            for idx, own in enumerate(remaining):
                if {serialize_filter(p.filter) for p in own} == serialized:
                    best = idx
                    break
            if best is None:
                continue
            own = remaining.pop(best)
            match_filters(sub.filters, own, f"subtasks[{j}].")
    return spans
