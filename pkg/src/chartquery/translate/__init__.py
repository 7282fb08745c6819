"""Natural-language queries to tasks."""

from __future__ import annotations

from ..chart.model import ChartSpec, ChartState
from .base import TextSpan, Translation
from .remote import RemoteTranslator
from .rules import RulesTranslator, detect_operation

_BACKENDS = {
    "rules": RulesTranslator,
    "remote": RemoteTranslator,
}


def translate_query(
    text: str,
    spec: ChartSpec,
    prior: ChartState | None = None,
    backend: str = "rules",
) -> Translation:
    try:
        cls = _BACKENDS[backend]
    except KeyError:
        raise ValueError(
            f"unknown translation backend {backend!r}; expected one of {sorted(_BACKENDS)}"
        ) from None
    return cls().translate(text, spec, prior)


__all__ = [
    "RemoteTranslator",
    "RulesTranslator",
    "TextSpan",
    "Translation",
    "detect_operation",
    "translate_query",
]
