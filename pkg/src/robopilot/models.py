"""Model backends: deterministic scripted replay and a remote chat client.

The agent consumes only ModelRequest -> ModelResponse, so backends are
interchangeable. The scripted backend is the test oracle; the remote
client speaks a chat-completions-style wire format and is exercised
against local stub servers.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field

import httpx

from .errors import (
    AuthError,
    BackendUnavailable,
    NoMatchingRule,
    ResponseMappingError,
    ScriptSyntaxError,
)
from .memory import MIN_CONTEXT_BUDGET, Message

API_KEY_ENV = "ROSA_MODEL_API_KEY"


@dataclass(frozen=True)
class ModelRequest:
    messages: list[Message]
    catalog: str


@dataclass(frozen=True)
class ModelResponse:
    content: str

    def __post_init__(self):
        if not self.content:
            raise ValueError("model response content must be non-empty")


@dataclass(frozen=True)
class ModelCapabilities:
    supports_tool_calling: bool
    max_context_tokens: int


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str = ""


def validate_model(caps: ModelCapabilities) -> ValidationResult:
    """Check the two hard requirements for a usable backend model."""
    if not caps.supports_tool_calling:
        return ValidationResult(False, "model does not support tool calling")
    if caps.max_context_tokens < MIN_CONTEXT_BUDGET:
        return ValidationResult(
            False,
            f"context length {caps.max_context_tokens} is below the "
            f"required {MIN_CONTEXT_BUDGET} tokens",
        )
    return ValidationResult(True)


# --- scripted backend ---------------------------------------------------


@dataclass(frozen=True)
class ScriptRule:
    """One response rule.

    Exactly one of `trigger` (regex searched in the latest user/tool
    message) or `step` (1-based completion-call index) is set. `repeat`
    rules stay eligible after firing; normal rules advance the cursor
    past themselves.
    """

    response: str
    trigger: str | None = None
    step: int | None = None
    repeat: bool = False

    def matches(self, latest: str, step_index: int) -> re.Match | bool | None:
        if self.step is not None:
            return self.step == step_index
        assert self.trigger is not None
        return re.search(self.trigger, latest)


@dataclass
class Script:
    rules: list[ScriptRule]
    cursor: int = 0
    step_index: int = 0


SCRIPT_GRAMMAR = """\
Script files are plain text. Rules are separated by lines containing only
`---`. Within a rule block:

  - lines starting with `#` before the header are comments,
  - the header line is `trigger: <regex>` or `step: <N>` (1-based call index),
  - an optional `repeat: true` line keeps the rule eligible after it fires,
  - all remaining lines are the response body, verbatim.

`$1`..`$9` in a response body are replaced with the trigger regex's capture
groups. Rules are evaluated in order starting at the cursor; the first
match fires and (unless `repeat`) moves the cursor past itself. A call
matching no rule is a hard NoMatchingRule error, never a fallback.
"""


def parse_script(text: str) -> Script:
    rules: list[ScriptRule] = []
    blocks = re.split(r"(?m)^---\s*$", text)
    for block in blocks:
        lines = block.splitlines()
        header: str | None = None
        body_start = 0
        repeat = False
        for i, line in enumerate(lines):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if header is None:
                header = stripped
                body_start = i + 1
                continue
            if stripped == "repeat: true" and body_start == i:
                repeat = True
                body_start = i + 1
                continue
            break
        if header is None:
            continue
        body = "\n".join(lines[body_start:]).strip("\n")
        if not body:
            raise ScriptSyntaxError(f"rule {header!r} has an empty response body")
        if header.startswith("trigger:"):
            rules.append(ScriptRule(body, trigger=header[len("trigger:"):].strip(), repeat=repeat))
        elif header.startswith("step:"):
            try:
                step = int(header[len("step:"):].strip())
            except ValueError:
                raise ScriptSyntaxError(f"bad step index in {header!r}")
            rules.append(ScriptRule(body, step=step, repeat=repeat))
        else:
            raise ScriptSyntaxError(f"rule header must be 'trigger:' or 'step:', got {header!r}")
    if not rules:
        raise ScriptSyntaxError("script contains no rules")
    return Script(rules)


class ScriptedBackend:
    """Deterministic replay backend driven by a Script."""

    def __init__(self, script: Script):
        self.script = script

    @classmethod
    def from_text(cls, text: str) -> "ScriptedBackend":
        return cls(parse_script(text))

    @classmethod
    def from_file(cls, path) -> "ScriptedBackend":
        from pathlib import Path

        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def complete(self, request: ModelRequest) -> ModelResponse:
        self.script.step_index += 1
        latest = ""
        for message in reversed(request.messages):
            if message.role in ("user", "tool"):
                latest = message.content
                break
        for i in range(self.script.cursor, len(self.script.rules)):
            rule = self.script.rules[i]
            match = rule.matches(latest, self.script.step_index)
            if not match:
                continue
            if not rule.repeat:
                self.script.cursor = i + 1
            response = rule.response
            if isinstance(match, re.Match):
                for g, value in enumerate(match.groups() or (), start=1):
                    response = response.replace(f"${g}", value or "")
            return ModelResponse(response)
        raise NoMatchingRule(
            f"no script rule matches step {self.script.step_index}, "
            f"latest message {latest[:120]!r}"
        )


# --- remote backend -----------------------------------------------------


@dataclass
class RemoteConfig:
    endpoint: str
    model: str = "default"
    api_key_env: str = API_KEY_ENV
    timeout: float = 30.0
    # Delays before each retry; overridable so tests need not sleep.
    backoff: tuple[float, ...] = (0.5, 1.0, 2.0)


class RemoteBackend:
    """Chat-completions-style HTTP client with retry/backoff."""

    def __init__(self, config: RemoteConfig, client: httpx.Client | None = None):
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout)

    def complete(self, request: ModelRequest) -> ModelResponse:
        api_key = os.environ.get(self.config.api_key_env)
        if not api_key:
            raise AuthError(f"credential missing: set {self.config.api_key_env}")
        body = {
            "model": self.config.model,
            "messages": [
                {"role": m.role, "content": m.content} for m in request.messages
            ],
            "tools": json.loads(request.catalog) if request.catalog else [],
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        attempts = len(self.config.backoff) + 1
        last_error: str = ""
        for attempt in range(attempts):
            if attempt > 0:
                time.sleep(self.config.backoff[attempt - 1])
            try:
                reply = self._client.post(
                    self.config.endpoint, json=body, headers=headers
                )
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                continue
            if reply.status_code in (401, 403):
                raise AuthError(f"authentication rejected ({reply.status_code})")
            if reply.status_code >= 500 or reply.status_code == 429:
                last_error = f"transient status {reply.status_code}"
                continue
            if reply.status_code != 200:
                raise BackendUnavailable(f"unexpected status {reply.status_code}")
            return self._map_reply(reply)
        raise BackendUnavailable(f"gave up after {attempts} attempts: {last_error}")

    @staticmethod
    def _map_reply(reply: httpx.Response) -> ModelResponse:
        try:
            data = reply.json()
            message = data["choices"][0]["message"]
        except (ValueError, LookupError, TypeError) as exc:
            raise ResponseMappingError(f"unmappable provider payload: {exc}")
        tool_calls = message.get("tool_calls")
        if tool_calls:
            mapped = []
            try:
                for i, record in enumerate(tool_calls):
                    fn = record["function"]
                    mapped.append(
                        {
                            "id": record.get("id", f"c{i + 1}"),
                            "group": 0,
                            "name": fn["name"],
                            "args": json.loads(fn.get("arguments") or "{}"),
                        }
                    )
            except (KeyError, TypeError, ValueError) as exc:
                raise ResponseMappingError(f"unmappable tool call record: {exc}")
            content = {
                "reasoning": message.get("content") or "",
                "tool_calls": mapped,
            }
            return ModelResponse(json.dumps(content, sort_keys=True))
        content = message.get("content")
        if not content:
            raise ResponseMappingError("provider reply has neither content nor tool calls")
        return ModelResponse(content)
