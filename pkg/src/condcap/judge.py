"""Pluggable judge clients with schema-validated structured replies.

Every judge call is identified by a content key (template id, template
version, rendered prompt) and can be recorded to an append-only replay
cache. Replaying from a complete cache is the only fully deterministic
mode and the only one used in tests; a cache miss during replay is an
error, never a network call.
"""

from __future__ import annotations

import hashlib
import json
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import jsonschema

#: Closed aspect vocabulary shared with the intent-reasoning pipeline.
ASPECT_VALUES = ("subject", "background", "movement", "camera", "interaction", "style")

RESPONSE_SCHEMAS: dict[str, dict] = {
    "ir_intent.v1": {
        "type": "object",
        "required": ["aspects"],
        "additionalProperties": False,
        "properties": {
            "aspects": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["aspect", "note"],
                    "additionalProperties": False,
                    "properties": {
                        "aspect": {"enum": list(ASPECT_VALUES)},
                        "note": {"type": "string", "minLength": 1},
                    },
                },
            }
        },
    },
    "ir_qa_pairs.v1": {
        "type": "object",
        "required": ["pairs"],
        "additionalProperties": False,
        "properties": {
            "pairs": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["aspect", "question", "gt_answer"],
                    "additionalProperties": False,
                    "properties": {
                        "aspect": {"enum": list(ASPECT_VALUES)},
                        "question": {"type": "string", "pattern": "\\?$"},
                        "gt_answer": {"type": "string", "minLength": 1},
                    },
                },
            }
        },
    },
    "ir_answer.v1": {
        "type": "object",
        "required": ["answer"],
        "additionalProperties": False,
        "properties": {"answer": {"type": "string", "minLength": 1}},
    },
    "ir_verdict.v1": {
        "type": "object",
        "required": ["correct", "quality"],
        "additionalProperties": False,
        "properties": {
            "correct": {"type": "boolean"},
            "quality": {"type": "integer", "minimum": 0, "maximum": 5},
            "rationale": {"type": "string"},
        },
    },
}


class JudgeError(RuntimeError):
    pass


class JudgeSchemaError(JudgeError):
    """Judge reply failed schema validation; carries the raw response."""

    def __init__(self, message: str, raw: object = None) -> None:
        super().__init__(message)
        self.raw = raw


class CacheMissError(JudgeError):
    """Replay-mode lookup found no cached response for a call."""

    def __init__(self, key: str, request: "JudgeRequest") -> None:
        super().__init__(
            f"replay cache miss for template {request.template_id} "
            f"v{request.template_version} (key {key})"
        )
        self.key = key


@dataclass(frozen=True)
class JudgeRequest:
    template_id: str
    template_version: int
    prompt_text: str
    schema_id: str

    def key(self) -> str:
        material = f"{self.template_id}\n{self.template_version}\n{self.prompt_text}"
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def to_wire(self) -> dict:
        return {
            "template_id": self.template_id,
            "template_version": self.template_version,
            "prompt_text": self.prompt_text,
            "schema_id": self.schema_id,
        }


def validate_response(schema_id: str, payload: object) -> dict:
    schema = RESPONSE_SCHEMAS.get(schema_id)
    if schema is None:
        raise JudgeError(f"unknown response schema {schema_id!r}")
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise JudgeSchemaError(
            f"judge reply violates schema {schema_id}: {exc.message}", raw=payload
        ) from exc
    return payload  # type: ignore[return-value]


class ReplayCache:
    """Append-only line-delimited log of judge calls, keyed by content hash.

    Entries are immutable: re-recording a key with a different response is
    an error; identical re-records are no-ops.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._entries: dict[str, dict] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            for lineno, line in enumerate(self.path.read_text().splitlines(), start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    key = entry["key"]
                    response = entry["response"]
                except (json.JSONDecodeError, KeyError) as exc:
                    raise JudgeError(f"{self.path}: line {lineno}: {exc}") from exc
                self._entries[key] = response

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> dict | None:
        return self._entries.get(key)

    def append(self, request: JudgeRequest, response: dict) -> None:
        key = request.key()
        with self._lock:
            existing = self._entries.get(key)
            if existing is not None:
                if existing != response:
                    raise JudgeError(f"cache entry {key} is immutable")
                return
            entry = {
                "key": key,
                "request": request.to_wire(),
                "response": response,
                "timestamp": datetime.now(timezone.utc).isoformat(),
            }
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
            self._entries[key] = response


class JudgeClient(ABC):
    """Completes a rendered prompt into a schema-validated response."""

    @abstractmethod
    def complete(self, request: JudgeRequest) -> dict: ...


class ReplayJudgeClient(JudgeClient):
    """Serves responses from a replay cache only; misses are errors."""

    def __init__(self, cache: ReplayCache) -> None:
        self.cache = cache

    def complete(self, request: JudgeRequest) -> dict:
        response = self.cache.get(request.key())
        if response is None:
            raise CacheMissError(request.key(), request)
        return validate_response(request.schema_id, response)


@dataclass
class JudgeConfig:
    """Remote judge deployment configuration.

    Credentials are read from the environment variable named by
    ``api_key_env`` and sent as a bearer token.
    """

    endpoint: str
    model: str = "judge"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3
    api_key_env: str = "CONDCAP_JUDGE_API_KEY"


_CORRECTION_SUFFIX = (
    "\n\nYour previous reply did not validate against the required JSON "
    "schema ({error}). Reply again with valid JSON only."
)


class HttpJudgeClient(JudgeClient):
    """HTTP judge client speaking the JSON wire protocol.

    Request body: the four :meth:`JudgeRequest.to_wire` fields plus the
    configured model name and sampling temperature. Response body:
    ``{"payload": <schema_id-conforming object>}``. Schema violations are
    retried up to ``max_retries`` times with a corrective re-prompt, then
    raised. Validated responses are recorded to ``cache`` when given, under
    the original request key.
    """

    def __init__(
        self,
        config: JudgeConfig,
        cache: ReplayCache | None = None,
        transport: Callable[[dict], dict] | None = None,
    ) -> None:
        self.config = config
        self.cache = cache
        self._transport = transport or self._http_transport

    def _http_transport(self, body: dict) -> dict:
        import os

        import requests

        headers = {}
        token = os.environ.get(self.config.api_key_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        response = requests.post(
            self.config.endpoint, json=body, headers=headers, timeout=self.config.timeout
        )
        response.raise_for_status()
        return response.json()

    def complete(self, request: JudgeRequest) -> dict:
        prompt = request.prompt_text
        last_error: JudgeSchemaError | None = None
        for _ in range(max(1, self.config.max_retries)):
            body = {
                **request.to_wire(),
                "prompt_text": prompt,
                "model": self.config.model,
                "temperature": self.config.temperature,
            }
            reply = self._transport(body)
            payload = reply.get("payload") if isinstance(reply, dict) else None
            try:
                validated = validate_response(request.schema_id, payload)
            except JudgeSchemaError as exc:
                last_error = exc
                prompt = request.prompt_text + _CORRECTION_SUFFIX.format(error=exc)
                continue
            if self.cache is not None:
                self.cache.append(request, validated)
            return validated
        assert last_error is not None
        raise last_error
