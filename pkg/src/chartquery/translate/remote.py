"""Translation backend that delegates parsing to a hosted language model.

The service is expected to return the task in its canonical text form;
everything else (validation, canonicalization) happens locally, so a
misbehaving endpoint can produce FormatError but never a malformed task.

Configuration comes from the environment:
    CHARTQUERY_LLM_ENDPOINT   chat-completions style URL (required)
    CHARTQUERY_LLM_API_KEY    bearer token, optional
    CHARTQUERY_LLM_MODEL      model name, default "gpt-4o"
    CHARTQUERY_LLM_TIMEOUT    seconds, default 30
"""

from __future__ import annotations

import json
import os

import httpx

from ..chart.model import ChartSpec, ChartState, spec_to_json
from ..errors import RemoteUnavailable
from ..taskir import parse_task_text
from .base import Translation

_SYSTEM_PROMPT = """\
You turn questions about a chart into a structured task expression.

Expression shapes:
  (identify <target>; filter: <attr> <op> <value>, ...)
  (compare <target>; derive: difference(<a>, <b>); sub: (identify ...), (identify ...))
  (aggregate <target>; filter: <target> = avg(<target>), ...)
  (trend <target>; filter: ...)
  (sum <target>; filter: ...; derive: sum(<a>, <b>))

Operators: = (equality or membership over [x, y]), > and < (thresholds),
in (closed range over [lo, hi]).  Aggregates: max(q), min(q), avg(q), sum(q).
Rank selections: filter `rank < k @top` or `rank = n @top` plus
`derive: rank(q) @top`.  Reference series drawn by color as color(green).

Answer with only the expression, no prose.
"""


class RemoteTranslator:
    """Asks a chat-completion endpoint to emit the task expression."""

    name = "remote"

    def __init__(self, client: httpx.Client | None = None) -> None:
        self.endpoint = os.environ.get("CHARTQUERY_LLM_ENDPOINT", "")
        self.api_key = os.environ.get("CHARTQUERY_LLM_API_KEY", "")
        self.model = os.environ.get("CHARTQUERY_LLM_MODEL", "gpt-4o")
        timeout = float(os.environ.get("CHARTQUERY_LLM_TIMEOUT", "30"))
        self._client = client or httpx.Client(timeout=timeout)

    def translate(
        self,
        text: str,
        spec: ChartSpec,
        prior: ChartState | None = None,
    ) -> Translation:
        if not self.endpoint:
            raise RemoteUnavailable(
                "remote translation needs CHARTQUERY_LLM_ENDPOINT to be set"
            )
        doc = spec_to_json(spec)
        doc.pop("rows", None)
        context = {"chart": doc}
        if prior is not None:
            context["derivedSeries"] = [
                d.name for d in prior.derived if d.kind == "data"
            ]
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": _SYSTEM_PROMPT},
                {
                    "role": "user",
                    "content": f"Chart:\n{json.dumps(context, sort_keys=True)}\n\nQuestion: {text}",
                },
            ],
            "temperature": 0,
        }
        try:
            resp = self._client.post(self.endpoint, json=payload, headers=headers)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise RemoteUnavailable(f"translation endpoint failed: {exc}") from exc
        try:
            body = resp.json()
            answer = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise RemoteUnavailable(
                f"translation endpoint returned an unexpected shape: {exc}"
            ) from exc
        task = parse_task_text(answer.strip().strip("`"))
        return Translation(task=task, spans={}, query=text, backend=self.name)
