"""Language-model provider abstraction for match proposals.

One operation: ``complete(request) -> response``. Two implementations ship:

* ``MockProvider``: deterministic and offline; wraps the heuristic engine
  and serializes its result as a provider reply. The acceptance suite runs
  on this one.
* ``HttpProvider``: a chat-completion client for an OpenAI-compatible
  endpoint; the API key is read from an environment variable, never from
  configuration files or flags.

Replies must validate against ``REPLY_SCHEMA``; invalid replies are retried
and then surfaced as a staged failure, never silently dropped.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import requests

from .diagnostics import Diagnostic, warning
from .ir import ModelIR, json_to_ir
from .matcher import (
    CandidateSet,
    MatchCandidate,
    MatchConfig,
    candidate_sort_key,
    eligible_elements,
    propose_heuristic,
)

PROMPT_RESOURCE = "sysmlv2_alignment_process.md"

REPLY_SCHEMA = {
    "type": "object",
    "required": ["candidates", "unmatched_source", "unmatched_target"],
    "properties": {
        "candidates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source_uid", "target_uid", "confidence", "rationale"],
                "properties": {
                    "source_uid": {"type": "string"},
                    "target_uid": {"type": "string"},
                    "confidence": {"type": "number"},
                    "rationale": {"type": "string"},
                    "features": {"type": "object"},
                },
            },
        },
        "unmatched_source": {"type": "array", "items": {"type": "string"}},
        "unmatched_target": {"type": "array", "items": {"type": "string"}},
    },
}


class ProviderError(Exception):
    """Transport-level failure talking to a provider."""


class ProviderReplyError(Exception):
    """The provider answered, but not with a schema-valid reply."""

    def __init__(self, message: str, attempts: int):
        self.attempts = attempts
        super().__init__(message)


@dataclass(frozen=True)
class ProviderRequest:
    stage: int
    prompt: str
    context: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"stage": self.stage, "prompt": self.prompt, "context": dict(sorted(self.context.items()))}


@dataclass(frozen=True)
class ProviderResponse:
    raw_text: str


class Provider:
    name = "provider"

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        raise NotImplementedError


def prompt_template() -> str:
    return resources.files("sysml_align.prompts").joinpath(PROMPT_RESOURCE).read_text("utf-8")


def stage_prompt(stage: int, context: dict) -> str:
    """Extract the stage section from the template and fill placeholders."""
    template = prompt_template()
    marker = f"## Stage {stage}"
    start = template.find(marker)
    section = template[start:] if start >= 0 else template
    nxt = section.find("\n## Stage", 1)
    if nxt > 0:
        section = section[:nxt]
    for key, value in context.items():
        section = section.replace("{{" + key + "}}", value or "")
    return section.strip() + "\n"


def build_match_request(
    source_ir_json: str,
    target_ir_json: str,
    library_text: str,
    focus: str | None,
    feedback: list[str] | None = None,
) -> ProviderRequest:
    context = {
        "source_ir": source_ir_json,
        "target_ir": target_ir_json,
        "extension_library": library_text,
        "focus": focus or "",
        "feedback": "\n".join(feedback or []),
    }
    return ProviderRequest(stage=2, prompt=stage_prompt(2, context), context=context)


class MockProvider(Provider):
    """Deterministic offline provider: replies with the heuristic engine's
    candidate set serialized as provider JSON."""

    name = "mock"

    def __init__(self, config: MatchConfig | None = None):
        self.config = config or MatchConfig()

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        source_ir = json_to_ir(request.context["source_ir"])
        target_ir = json_to_ir(request.context["target_ir"])
        proposal = propose_heuristic(source_ir, target_ir, self.config)
        reply = {
            "candidates": [
                {
                    "source_uid": c.source_uid,
                    "target_uid": c.target_uid,
                    "confidence": c.confidence,
                    "rationale": c.rationale,
                    "features": c.features,
                }
                for c in proposal.candidates
            ],
            "unmatched_source": proposal.unmatched_source,
            "unmatched_target": proposal.unmatched_target,
        }
        return ProviderResponse(raw_text=json.dumps(reply, sort_keys=True, indent=2))


class HttpProvider(Provider):
    """OpenAI-style chat-completion client.

    ``transport`` is injectable for tests; the default posts with requests.
    """

    name = "http"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "SYSML_ALIGN_API_KEY",
        timeout: float = 60.0,
        transport=None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self._transport = transport or self._post

    def _post(self, url: str, payload: dict, headers: dict) -> dict:
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()
        except requests.RequestException as exc:
            raise ProviderError(f"provider request failed: {exc}") from exc

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise ProviderError(f"environment variable {self.api_key_env} is not set")
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.prompt},
                {"role": "user", "content": json.dumps(request.context, sort_keys=True)},
            ],
            "response_format": {"type": "json_object"},
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        data = self._transport(f"{self.base_url}/chat/completions", payload, headers)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {data!r}") from exc
        return ProviderResponse(raw_text=content)


def parse_reply(
    raw_text: str,
    source_ir: ModelIR,
    target_ir: ModelIR,
    config: MatchConfig,
    focus: str | None = None,
) -> tuple[CandidateSet, list[Diagnostic]]:
    """Validate and normalize a provider reply into a CandidateSet.

    Raises ValueError when the reply is not schema-valid (the caller owns
    retries); out-of-range confidences are clamped and unknown UIDs dropped,
    each with a Warning diagnostic.
    """
    data = json.loads(raw_text)
    jsonschema.validate(data, REPLY_SCHEMA)

    diagnostics: list[Diagnostic] = []
    source_by_uid = source_ir.by_uid()
    target_by_uid = target_ir.by_uid()

    by_key: dict[tuple[str, str], MatchCandidate] = {}
    for item in data["candidates"]:
        suid, tuid = item["source_uid"], item["target_uid"]
        src, tgt = source_by_uid.get(suid), target_by_uid.get(tuid)
        if src is None or tgt is None:
            unknown = [u for u, el in ((suid, src), (tuid, tgt)) if el is None]
            diagnostics.append(
                warning("provider.unknown-uid", f"dropped pair ({suid}, {tuid}): unknown uid {', '.join(unknown)}")
            )
            continue
        confidence = item["confidence"]
        if confidence < 0.0 or confidence > 1.0:
            clamped = min(1.0, max(0.0, confidence))
            diagnostics.append(
                warning(
                    "provider.confidence-clamped",
                    f"confidence {confidence} for ({suid}, {tuid}) clamped to {clamped}",
                )
            )
            confidence = clamped
        candidate = MatchCandidate(
            source_uid=suid,
            target_uid=tuid,
            source_name=src.qualified_name,
            target_name=tgt.qualified_name,
            confidence=round(float(confidence), 4),
            rationale=item["rationale"],
            features={k: round(float(v), 4) for k, v in item.get("features", {}).items()},
            origin="Provider",
        )
        existing = by_key.get(candidate.key())
        if existing is not None:
            diagnostics.append(
                warning("provider.duplicate-pair", f"duplicate pair ({suid}, {tuid}); keeping the higher confidence")
            )
            if existing.confidence >= candidate.confidence:
                continue
        by_key[candidate.key()] = candidate

    candidates = sorted(by_key.values(), key=candidate_sort_key)
    matched_sources = {c.source_uid for c in candidates}
    matched_targets = {c.target_uid for c in candidates}
    candidate_set = CandidateSet(
        source_model=source_ir.model_name,
        source_digest=source_ir.source_digest,
        target_model=target_ir.model_name,
        target_digest=target_ir.source_digest,
        eligible_kinds=sorted(k.value for k in config.eligible_kinds),
        candidates=candidates,
        unmatched_source=sorted(el.uid for el in eligible_elements(source_ir, config) if el.uid not in matched_sources),
        unmatched_target=sorted(el.uid for el in eligible_elements(target_ir, config) if el.uid not in matched_targets),
        focus=focus,
    )
    return candidate_set, diagnostics


def propose_via_provider(
    provider: Provider,
    source_ir: ModelIR,
    target_ir: ModelIR,
    library_text: str,
    focus: str | None = None,
    config: MatchConfig | None = None,
    feedback: list[str] | None = None,
    retries: int = 2,
) -> tuple[CandidateSet, list[Diagnostic], ProviderRequest]:
    """Issue the Stage-2 prompt and validate the reply.

    Transport failures raise ProviderError immediately; schema-invalid
    replies are retried up to ``retries`` times and then raised as
    ProviderReplyError: a staged failure, never a silent partial result.
    """
    from .ir import ir_to_json

    config = config or MatchConfig()
    config.validate()
    request = build_match_request(ir_to_json(source_ir), ir_to_json(target_ir), library_text, focus, feedback)

    last_error: Exception | None = None
    for attempt in range(retries + 1):
        response = provider.complete(request)
        try:
            candidate_set, diagnostics = parse_reply(response.raw_text, source_ir, target_ir, config, focus)
            return candidate_set, diagnostics, request
        except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
            last_error = exc
    raise ProviderReplyError(
        f"provider reply failed schema validation after {retries + 1} attempts: {last_error}",
        attempts=retries + 1,
    )
