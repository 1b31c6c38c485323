"""Gateway tests: message types, scripted backend, HTTP backend against
a local mock server, and transcript record/replay."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from crashrepair.gateway import (
    ChatMessage,
    ContextLengthError,
    DriftError,
    GenerationParams,
    RecordingBackend,
    RemoteBackend,
    ReplayBackend,
    ScriptAssertionError,
    ScriptExhaustedError,
    ScriptedBackend,
    ScriptTurn,
    ToolCall,
    ToolParam,
    ToolSchema,
    TransportError,
    message_from_json,
    message_to_json,
)

PARAMS = GenerationParams(model="test-model")

ECHO_TOOL = ToolSchema(
    name="echo",
    description="Echo a value back.",
    params=(ToolParam("value", "string", "the value"),),
)


def test_message_validation():
    with pytest.raises(ValueError):
        ChatMessage(role="oracle")
    with pytest.raises(ValueError):
        ChatMessage(role="tool", content="x")  # missing tool_call_id
    with pytest.raises(ValueError):
        ChatMessage(role="user", tool_calls=[ToolCall("1", "echo", {})])
    ok = ChatMessage(role="tool", content="x", tool_call_id="call_0_0")
    assert ok.tool_call_id == "call_0_0"


def test_temperature_bounds():
    GenerationParams(temperature=0.0)
    GenerationParams(temperature=2.0)
    with pytest.raises(ValueError):
        GenerationParams(temperature=2.1)
    with pytest.raises(ValueError):
        GenerationParams(temperature=-0.1)
    assert GenerationParams().temperature == 0.2


def test_tool_schema_wire_format():
    assert ECHO_TOOL.to_wire() == {
        "type": "function",
        "function": {
            "name": "echo",
            "description": "Echo a value back.",
            "parameters": {
                "type": "object",
                "properties": {"value": {"type": "string", "description": "the value"}},
                "required": ["value"],
            },
        },
    }


def test_optional_params_not_required():
    schema = ToolSchema(
        name="t",
        description="d",
        params=(
            ToolParam("a", "integer", "first"),
            ToolParam("b", "integer", "second", required=False),
        ),
    )
    assert schema.to_wire()["function"]["parameters"]["required"] == ["a"]


def test_message_json_round_trip():
    message = ChatMessage(
        role="assistant",
        content="check it",
        tool_calls=[ToolCall("call_1_0", "run_to_line", {"file": "a.c", "line": 4})],
    )
    assert message_from_json(message_to_json(message)) == message


# -- scripted backend -----------------------------------------------------------


def test_scripted_turns_in_order():
    backend = ScriptedBackend(
        [
            ScriptTurn(content="first"),
            ScriptTurn(tool_calls=[{"name": "echo", "arguments": {"value": "hi"}}]),
        ]
    )
    first = backend.complete([ChatMessage("user", "go")], [ECHO_TOOL], PARAMS)
    assert first.content == "first"
    assert first.tool_calls == []
    second = backend.complete([ChatMessage("user", "go")], [ECHO_TOOL], PARAMS)
    assert second.tool_calls == [ToolCall("call_1_0", "echo", {"value": "hi"})]
    with pytest.raises(ScriptExhaustedError):
        backend.complete([ChatMessage("user", "go")], [ECHO_TOOL], PARAMS)


def test_scripted_expectation_matches_prompt():
    backend = ScriptedBackend([ScriptTurn(content="ok", expect=["SIGFPE"])])
    messages = [ChatMessage("user", "The crash was SIGFPE at div.c:4")]
    assert backend.complete(messages, [], PARAMS).content == "ok"


def test_scripted_expectation_failure_is_loud():
    backend = ScriptedBackend([ScriptTurn(content="ok", expect=["SIGFPE"])])
    with pytest.raises(ScriptAssertionError, match="SIGFPE"):
        backend.complete([ChatMessage("user", "all quiet")], [], PARAMS)


def test_scripted_from_file(tmp_path):
    script = [
        {"content": "thinking", "expect": ["crash"]},
        {"tool_calls": [{"name": "backtrace", "arguments": {}}]},
    ]
    path = tmp_path / "script.json"
    path.write_text(json.dumps(script))
    backend = ScriptedBackend.from_file(str(path))
    reply = backend.complete([ChatMessage("user", "a crash happened")], [], PARAMS)
    assert reply.content == "thinking"
    reply = backend.complete([ChatMessage("user", "a crash happened")], [], PARAMS)
    assert reply.tool_calls[0].name == "backtrace"


def test_scripted_sees_tool_call_payloads():
    backend = ScriptedBackend([ScriptTurn(content="ok", expect=['"line": 4'])])
    messages = [
        ChatMessage(
            "assistant",
            tool_calls=[ToolCall("c1", "run_to_line", {"file": "a.c", "line": 4})],
        ),
        ChatMessage("tool", content="stopped", tool_call_id="c1"),
    ]
    assert backend.complete(messages, [], PARAMS).content == "ok"


# -- remote backend ---------------------------------------------------------------


class _MockHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length)
        self.server.requests.append({"headers": dict(self.headers), "body": body})
        status, payload = self.server.responses.pop(0)
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def mock_server():
    server = HTTPServer(("127.0.0.1", 0), _MockHandler)
    server.requests = []
    server.responses = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()


def _backend(server, **kwargs):
    host, port = server.server_address
    return RemoteBackend(f"http://{host}:{port}/v1", backoff_s=0.01, **kwargs)


COMPLETION = {
    "choices": [
        {
            "message": {
                "role": "assistant",
                "content": "Inspect the divisor.",
                "tool_calls": [
                    {
                        "id": "call_abc",
                        "type": "function",
                        "function": {
                            "name": "run_to_line",
                            "arguments": '{"file": "div.c", "line": 4}',
                        },
                    }
                ],
            }
        }
    ]
}


def test_remote_parses_fixed_completion(mock_server):
    mock_server.responses.append((200, COMPLETION))
    reply = _backend(mock_server).complete(
        [ChatMessage("user", "fix it")], [ECHO_TOOL], PARAMS
    )
    assert reply == ChatMessage(
        role="assistant",
        content="Inspect the divisor.",
        tool_calls=[ToolCall("call_abc", "run_to_line", {"file": "div.c", "line": 4})],
    )
    sent = json.loads(mock_server.requests[0]["body"])
    assert sent["model"] == "test-model"
    assert sent["temperature"] == 0.2
    assert sent["tools"][0]["function"]["name"] == "echo"


def test_remote_retries_server_errors(mock_server):
    mock_server.responses.extend(
        [(500, {"error": "boom"}), (503, {"error": "busy"}), (200, COMPLETION)]
    )
    reply = _backend(mock_server).complete([ChatMessage("user", "x")], [], PARAMS)
    assert reply.content == "Inspect the divisor."
    assert len(mock_server.requests) == 3


def test_remote_gives_up_after_retries(mock_server):
    mock_server.responses.extend([(500, {})] * 3)
    with pytest.raises(TransportError, match="after 3 attempts"):
        _backend(mock_server).complete([ChatMessage("user", "x")], [], PARAMS)


def test_remote_context_length_is_distinct(mock_server):
    mock_server.responses.append(
        (
            400,
            {
                "error": {
                    "message": "This model's maximum context length is 8192 tokens.",
                    "code": "context_length_exceeded",
                }
            },
        )
    )
    with pytest.raises(ContextLengthError):
        _backend(mock_server).complete([ChatMessage("user", "x")], [], PARAMS)


def test_remote_other_client_errors(mock_server):
    mock_server.responses.append((401, {"error": {"message": "bad key"}}))
    with pytest.raises(TransportError, match="401"):
        _backend(mock_server).complete([ChatMessage("user", "x")], [], PARAMS)


def test_remote_unreachable_host():
    backend = RemoteBackend("http://127.0.0.1:1", backoff_s=0.01)
    with pytest.raises(TransportError):
        backend.complete([ChatMessage("user", "x")], [], PARAMS)


def test_malformed_tool_arguments_preserved(mock_server):
    payload = {
        "choices": [
            {
                "message": {
                    "role": "assistant",
                    "content": "",
                    "tool_calls": [
                        {
                            "id": "c1",
                            "type": "function",
                            "function": {"name": "echo", "arguments": "not json {"},
                        }
                    ],
                }
            }
        ]
    }
    mock_server.responses.append((200, payload))
    reply = _backend(mock_server).complete([ChatMessage("user", "x")], [], PARAMS)
    assert reply.tool_calls[0].arguments == {"_raw": "not json {"}


def test_api_key_in_header_never_in_recording(mock_server, monkeypatch, tmp_path):
    monkeypatch.setenv("OPENAI_API_KEY", "sk-super-secret")
    mock_server.responses.append((200, COMPLETION))
    sink = tmp_path / "transcript.jsonl"
    backend = RecordingBackend(_backend(mock_server), str(sink))
    backend.complete([ChatMessage("user", "fix it")], [ECHO_TOOL], PARAMS)
    sent = mock_server.requests[0]
    assert sent["headers"].get("Authorization") == "Bearer sk-super-secret"
    assert "sk-super-secret" not in sent["body"].decode()
    assert "sk-super-secret" not in sink.read_text()


# -- record / replay ---------------------------------------------------------------


def scripted_pair():
    return ScriptedBackend(
        [
            ScriptTurn(content="look at the crash"),
            ScriptTurn(tool_calls=[{"name": "echo", "arguments": {"value": "v"}}]),
        ]
    )


def test_record_then_replay_round_trip(tmp_path):
    sink = tmp_path / "rec.jsonl"
    recorder = RecordingBackend(scripted_pair(), str(sink))
    conversation = [ChatMessage("user", "start")]
    first = recorder.complete(conversation, [ECHO_TOOL], PARAMS)
    conversation = conversation + [first, ChatMessage("user", "next")]
    second = recorder.complete(conversation, [ECHO_TOOL], PARAMS)

    replay = ReplayBackend(str(sink))
    conversation = [ChatMessage("user", "start")]
    assert replay.complete(conversation, [ECHO_TOOL], PARAMS) == first
    conversation = conversation + [first, ChatMessage("user", "next")]
    assert replay.complete(conversation, [ECHO_TOOL], PARAMS) == second


def test_replay_tolerates_whitespace(tmp_path):
    sink = tmp_path / "rec.jsonl"
    recorder = RecordingBackend(scripted_pair(), str(sink))
    recorder.complete([ChatMessage("user", "start  here")], [], PARAMS)
    replay = ReplayBackend(str(sink))
    reply = replay.complete([ChatMessage("user", "start\nhere")], [], PARAMS)
    assert reply.content == "look at the crash"


def test_replay_detects_drift(tmp_path):
    sink = tmp_path / "rec.jsonl"
    recorder = RecordingBackend(scripted_pair(), str(sink))
    recorder.complete([ChatMessage("user", "start")], [], PARAMS)
    replay = ReplayBackend(str(sink))
    with pytest.raises(DriftError, match="content"):
        replay.complete([ChatMessage("user", "different")], [], PARAMS)


def test_replay_exhaustion(tmp_path):
    sink = tmp_path / "rec.jsonl"
    sink.write_text("")
    replay = ReplayBackend(str(sink))
    with pytest.raises(ScriptExhaustedError):
        replay.complete([ChatMessage("user", "x")], [], PARAMS)
