"""LLM access: remote chat-completions backend, scripted backend for
tests, and transcript record/replay.

All backends expose one operation, complete(messages, tools, params)
-> assistant ChatMessage. The scripted backend serves canned turns and
can assert on the prompt it was shown, which keeps end-to-end tests
deterministic without a network.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import requests


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    pass


class ContextLengthError(GatewayError):
    pass


class ScriptExhaustedError(GatewayError):
    pass


class ScriptAssertionError(GatewayError):
    pass


class DriftError(GatewayError):
    pass


# -- messages and schemas ------------------------------------------------------


@dataclass
class ToolCall:
    id: str
    name: str
    arguments: dict


@dataclass
class ChatMessage:
    role: str  # system | user | assistant | tool
    content: str = ""
    tool_calls: list[ToolCall] = field(default_factory=list)
    tool_call_id: Optional[str] = None

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant", "tool"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role == "tool" and not self.tool_call_id:
            raise ValueError("tool messages must carry a tool_call_id")
        if self.tool_calls and self.role != "assistant":
            raise ValueError("only assistant messages may carry tool calls")


@dataclass(frozen=True)
class GenerationParams:
    model: str = "scripted"
    temperature: float = 0.2
    max_tokens: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")


@dataclass(frozen=True)
class ToolParam:
    name: str
    type: str
    description: str
    required: bool = True


@dataclass(frozen=True)
class ToolSchema:
    name: str
    description: str
    params: tuple = ()

    def to_wire(self) -> dict:
        properties = {
            p.name: {"type": p.type, "description": p.description} for p in self.params
        }
        return {
            "type": "function",
            "function": {
                "name": self.name,
                "description": self.description,
                "parameters": {
                    "type": "object",
                    "properties": properties,
                    "required": [p.name for p in self.params if p.required],
                },
            },
        }


def message_to_json(message: ChatMessage) -> dict:
    out: dict = {"role": message.role, "content": message.content}
    if message.tool_calls:
        out["tool_calls"] = [
            {"id": c.id, "name": c.name, "arguments": c.arguments}
            for c in message.tool_calls
        ]
    if message.tool_call_id:
        out["tool_call_id"] = message.tool_call_id
    return out


def message_from_json(data: dict) -> ChatMessage:
    return ChatMessage(
        role=data["role"],
        content=data.get("content", "") or "",
        tool_calls=[
            ToolCall(id=c["id"], name=c["name"], arguments=dict(c["arguments"]))
            for c in data.get("tool_calls", [])
        ],
        tool_call_id=data.get("tool_call_id"),
    )


def _message_to_wire(message: ChatMessage) -> dict:
    out: dict = {"role": message.role, "content": message.content}
    if message.tool_calls:
        out["tool_calls"] = [
            {
                "id": c.id,
                "type": "function",
                "function": {"name": c.name, "arguments": json.dumps(c.arguments)},
            }
            for c in message.tool_calls
        ]
    if message.tool_call_id:
        out["tool_call_id"] = message.tool_call_id
    return out


# -- scripted backend ----------------------------------------------------------


@dataclass
class ScriptTurn:
    content: str = ""
    tool_calls: list = field(default_factory=list)  # [{"name", "arguments"}]
    expect: list = field(default_factory=list)  # substrings of the visible prompt


class ScriptedBackend:
    """Serves a fixed sequence of assistant turns.

    Each turn may assert that given substrings appear in the prompt the
    model would see (all message contents plus tool-call payloads), so
    a script fails loudly when the orchestrator drifts.
    """

    def __init__(self, turns: list[ScriptTurn]):
        self.turns = list(turns)
        self.cursor = 0

    @classmethod
    def from_file(cls, path: str) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text())
        turns = [
            ScriptTurn(
                content=entry.get("content", ""),
                tool_calls=list(entry.get("tool_calls", [])),
                expect=list(entry.get("expect", [])),
            )
            for entry in data
        ]
        return cls(turns)

    @staticmethod
    def render_prompt(messages: list[ChatMessage]) -> str:
        parts = []
        for m in messages:
            parts.append(f"[{m.role}] {m.content}")
            for call in m.tool_calls:
                parts.append(f"[tool-call] {call.name} {json.dumps(call.arguments, sort_keys=True)}")
        return "\n".join(parts)

    def complete(self, messages, tools, params) -> ChatMessage:
        if self.cursor >= len(self.turns):
            raise ScriptExhaustedError(
                f"script exhausted after {len(self.turns)} turns"
            )
        turn = self.turns[self.cursor]
        visible = self.render_prompt(messages)
        for needle in turn.expect:
            if needle not in visible:
                raise ScriptAssertionError(
                    f"turn {self.cursor}: expected {needle!r} in the prompt"
                )
        calls = [
            ToolCall(
                id=f"call_{self.cursor}_{i}",
                name=c["name"],
                arguments=dict(c.get("arguments", {})),
            )
            for i, c in enumerate(turn.tool_calls)
        ]
        self.cursor += 1
        return ChatMessage(role="assistant", content=turn.content, tool_calls=calls)


# -- remote backend -------------------------------------------------------------

_CONTEXT_LENGTH_MARKERS = ("context_length", "context length", "maximum context")


class RemoteBackend:
    """OpenAI-compatible chat-completions endpoint with tool calling."""

    def __init__(
        self,
        base_url: str,
        api_key_env: str = "OPENAI_API_KEY",
        timeout_s: float = 120.0,
        max_retries: int = 3,
        backoff_s: float = 0.5,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key_env = api_key_env
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.backoff_s = backoff_s

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, messages, tools, params: GenerationParams) -> ChatMessage:
        payload: dict = {
            "model": params.model,
            "messages": [_message_to_wire(m) for m in messages],
            "temperature": params.temperature,
        }
        if params.max_tokens is not None:
            payload["max_tokens"] = params.max_tokens
        if params.seed is not None:
            payload["seed"] = params.seed
        if tools:
            payload["tools"] = [t.to_wire() for t in tools]

        url = f"{self.base_url}/chat/completions"
        last_error: Optional[str] = None
        for attempt in range(self.max_retries):
            try:
                response = requests.post(
                    url, json=payload, headers=self._headers(), timeout=self.timeout_s
                )
            except requests.RequestException as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                time.sleep(self.backoff_s * (2**attempt))
                continue
            if response.status_code >= 500:
                last_error = f"server error {response.status_code}"
                time.sleep(self.backoff_s * (2**attempt))
                continue
            if response.status_code >= 400:
                body = response.text
                if any(marker in body.lower() for marker in _CONTEXT_LENGTH_MARKERS):
                    raise ContextLengthError(f"context window exceeded: {response.status_code}")
                raise TransportError(f"request rejected ({response.status_code}): {body[:500]}")
            return self._parse_completion(response.json())
        raise TransportError(f"transport failed after {self.max_retries} attempts: {last_error}")

    @staticmethod
    def _parse_completion(data: dict) -> ChatMessage:
        try:
            raw = data["choices"][0]["message"]
        except (KeyError, IndexError) as exc:
            raise TransportError(f"malformed completion payload: {exc}") from exc
        calls = []
        for c in raw.get("tool_calls") or []:
            args_text = c.get("function", {}).get("arguments", "{}")
            try:
                arguments = json.loads(args_text) if args_text else {}
            except json.JSONDecodeError:
                arguments = {"_raw": args_text}
            if not isinstance(arguments, dict):
                arguments = {"_raw": args_text}
            calls.append(
                ToolCall(
                    id=c.get("id", f"call_{len(calls)}"),
                    name=c.get("function", {}).get("name", ""),
                    arguments=arguments,
                )
            )
        return ChatMessage(
            role="assistant", content=raw.get("content") or "", tool_calls=calls
        )


# -- record / replay -------------------------------------------------------------


def _request_fingerprint(messages, tools, params: GenerationParams) -> dict:
    return {
        "messages": [message_to_json(m) for m in messages],
        "tools": [t.to_wire() for t in tools],
        "params": {
            "model": params.model,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "seed": params.seed,
        },
    }


_WS = re.compile(r"\s+")


def _normalize(value):
    if isinstance(value, str):
        return _WS.sub(" ", value).strip()
    if isinstance(value, dict):
        return {k: _normalize(v) for k, v in sorted(value.items())}
    if isinstance(value, list):
        return [_normalize(v) for v in value]
    return value


def _first_difference(expected, actual, path="request"):
    if type(expected) is not type(actual):
        return f"{path}: type {type(expected).__name__} != {type(actual).__name__}"
    if isinstance(expected, dict):
        for key in sorted(set(expected) | set(actual)):
            if key not in expected:
                return f"{path}.{key}: unexpected field"
            if key not in actual:
                return f"{path}.{key}: missing field"
            diff = _first_difference(expected[key], actual[key], f"{path}.{key}")
            if diff:
                return diff
        return None
    if isinstance(expected, list):
        if len(expected) != len(actual):
            return f"{path}: length {len(expected)} != {len(actual)}"
        for i, (e, a) in enumerate(zip(expected, actual)):
            diff = _first_difference(e, a, f"{path}[{i}]")
            if diff:
                return diff
        return None
    if expected != actual:
        return f"{path}: {expected!r} != {actual!r}"
    return None


class RecordingBackend:
    """Wraps a backend and appends each exchange to a JSONL file."""

    def __init__(self, inner, sink_path: str):
        self.inner = inner
        self.sink_path = Path(sink_path)

    def complete(self, messages, tools, params) -> ChatMessage:
        response = self.inner.complete(messages, tools, params)
        entry = {
            "request": _request_fingerprint(messages, tools, params),
            "response": message_to_json(response),
        }
        with self.sink_path.open("a") as sink:
            sink.write(json.dumps(entry) + "\n")
        return response


class ReplayBackend:
    """Serves recorded responses; any request drift is an error."""

    def __init__(self, source_path: str):
        self.entries = [
            json.loads(line)
            for line in Path(source_path).read_text().splitlines()
            if line.strip()
        ]
        self.cursor = 0

    def complete(self, messages, tools, params) -> ChatMessage:
        if self.cursor >= len(self.entries):
            raise ScriptExhaustedError(f"recording exhausted after {len(self.entries)} exchanges")
        entry = self.entries[self.cursor]
        expected = _normalize(entry["request"])
        actual = _normalize(_request_fingerprint(messages, tools, params))
        diff = _first_difference(expected, actual)
        if diff:
            raise DriftError(diff)
        self.cursor += 1
        return message_from_json(entry["response"])
