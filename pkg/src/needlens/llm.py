"""HTTP client for the pluggable LLM stage.

The engine speaks to any endpoint implementing the wire contract:
POST <url> with JSON {task, context, payload, schema} and a JSON response
{content, structured}. Non-conforming responses are retried once with a
stricter instruction, then treated as absent; every consumer has a
deterministic rule-based fallback, so a missing or failing endpoint never
blocks the pipeline.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any

TASKS = ("align_moa", "score_needs", "write_report")

ENV_URL = "NEEDLENS_LLM_URL"
ENV_KEY = "NEEDLENS_LLM_API_KEY"

NONE_SENTINEL = "NONE"


@dataclass
class LlmResponse:
    content: str
    structured: Any = None


class LlmClient:
    def __init__(self, url: str, api_key: str | None = None, timeout: float = 30.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    @classmethod
    def from_env(cls) -> "LlmClient | None":
        url = os.environ.get(ENV_URL)
        if not url:
            return None
        return cls(url, api_key=os.environ.get(ENV_KEY))

    def _post(self, body: dict) -> dict | None:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = httpx.post(self.url, json=body, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            data = resp.json()
        except Exception:
            return None
        if not isinstance(data, dict) or "content" not in data:
            return None
        return data

    def request(
        self,
        task: str,
        context: str,
        payload: str,
        schema: dict | None = None,
        validate=None,
    ) -> LlmResponse | None:
        """One call with a single retry on transport failure or an invalid
        structured result; returns None when both attempts fail."""
        if task not in TASKS:
            raise ValueError(f"unknown LLM task {task!r}")
        body = {"task": task, "context": context, "payload": payload, "schema": schema or {}}
        for attempt in range(2):
            if attempt == 1:
                body = dict(body, payload=payload + "\nRespond with exactly the requested schema.")
            data = self._post(body)
            if data is None:
                continue
            resp = LlmResponse(content=str(data.get("content", "")), structured=data.get("structured"))
            if validate is None or validate(resp):
                return resp
        return None


def align_moa_via_llm(client: LlmClient, need_label: str, keywords, ontology) -> str | None:
    """Ask the endpoint for the best MoA concept id; None when it declines
    or answers with anything that is not a known node id."""
    moa_nodes = ontology.by_layer("moa_concept")
    context = "\n".join(f"{n.id}: {n.label}" for n in moa_nodes)
    payload = (
        f"need: {need_label}\nkeywords: {', '.join(sorted(keywords))}\n"
        f"Pick the single most relevant MoA concept id from the context, "
        f"or {NONE_SENTINEL}."
    )

    def valid(resp: LlmResponse) -> bool:
        value = _extract_id(resp)
        return value == NONE_SENTINEL or value in ontology

    resp = client.request(
        "align_moa",
        context,
        payload,
        schema={"type": "object", "properties": {"node_id": {"type": "string"}}},
        validate=valid,
    )
    if resp is None:
        return None
    value = _extract_id(resp)
    if value == NONE_SENTINEL or value not in ontology:
        return None
    return value


def _extract_id(resp: LlmResponse) -> str:
    if isinstance(resp.structured, dict) and "node_id" in resp.structured:
        return str(resp.structured["node_id"]).strip()
    return resp.content.strip()


def score_needs_via_llm(client: LlmClient, text: str, context: str, labels: list[str]) -> dict[str, float] | None:
    """Ask for a score vector over candidate needs; None on failure."""

    def valid(resp: LlmResponse) -> bool:
        s = resp.structured
        if not isinstance(s, dict) or not isinstance(s.get("scores"), dict):
            return False
        scores = s["scores"]
        try:
            return all(float(scores.get(l, 0.0)) >= 0.0 for l in labels) and any(
                float(scores.get(l, 0.0)) > 0.0 for l in labels
            )
        except (TypeError, ValueError):
            return False

    payload = f"document: {text}\ncandidates: {', '.join(labels)}"
    resp = client.request(
        "score_needs",
        context,
        payload,
        schema={"type": "object", "properties": {"scores": {"type": "object"}}},
        validate=valid,
    )
    if resp is None:
        return None
    raw = {l: max(0.0, float(resp.structured["scores"].get(l, 0.0))) for l in labels}
    total = sum(raw.values())
    return {l: v / total for l, v in raw.items()}


def write_report_via_llm(client: LlmClient, facts: str) -> dict[str, str] | None:
    """Ask for the three narrative sections; None on failure."""

    def valid(resp: LlmResponse) -> bool:
        s = resp.structured
        return isinstance(s, dict) and all(
            isinstance(s.get(k), str) and s.get(k) for k in ("needs", "causes", "solutions")
        )

    resp = client.request(
        "write_report",
        facts,
        "Write the three sections (needs, causes, solutions) from the facts only.",
        schema={
            "type": "object",
            "properties": {k: {"type": "string"} for k in ("needs", "causes", "solutions")},
        },
        validate=valid,
    )
    if resp is None:
        return None
    return {k: resp.structured[k] for k in ("needs", "causes", "solutions")}
