"""Debugging-phase agent loop.

Drives an LLM through rounds of breakpoint inspection: the model picks a
target line, states the expected program state there, observes the actual
state, and compares the two.  The phase ends when the model reports a root
cause with fix locations, or when a cap trips.

Every prompt, reply, and tool result is appended to an AgentTranscript so a
finished run can be audited or replayed from the transcript alone.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .cfc.templates import CfcDocument
from .cindex import (
    DeclarationOnlyError,
    MissingFileError,
    PathEscapeError,
    SourceIndex,
    UnknownSymbolError,
)
from .debugger import (
    DebuggerError,
    DebugSession,
    EarlierCrash,
    EvalError,
    EvalResult,
    ExitedCleanly,
    OptimizedOut,
    StopInfo,
    Value,
)
from .gateway import ChatMessage, GenerationParams, ToolParam, ToolSchema, message_to_json
from .location import SourceLocation
from .project import ProjectSpec
from .report import Assertion, CrashReport, NoCrash, Sanitizer, Signal

# Injected verbatim before every run_to_line execution.
CHAIN_OF_THOUGHT_PROMPT = (
    "Think of the constraint and expected state of the program here based on the "
    "crash-free constraint. Compare it with the real state of the program to "
    "deepen the understanding of the bug."
)
# Constraint-free variant used when no constraint is available: the
# expectation discipline stays, the constraint reference goes.
NO_CFC_THOUGHT_PROMPT = (
    "Think of the expected state of the program here. Compare it with the real "
    "state of the program to deepen the understanding of the bug."
)
GATE_VIOLATION_RESULT = (
    "error: state your expectation in plain text first; the tool call was not run"
)
NUDGE_PROMPT = (
    "Continue the investigation with a tool call, or call report_summary once you "
    "know the root cause and fix locations."
)
PSI_PLACEHOLDER = "<not provided>"
PROMPT_FRAME_LIMIT = 10


@dataclass(frozen=True)
class Caps:
    max_rounds: int = 16
    max_tool_calls: int = 64
    max_tokens: Optional[int] = None

    def __post_init__(self):
        if self.max_rounds < 1 or self.max_tool_calls < 1:
            raise ValueError("caps must be positive")


@dataclass
class FixLocation:
    location: SourceLocation
    rationale: str = ""


@dataclass
class DebugRecord:
    round: int
    target: SourceLocation
    psi: str = ""
    gamma: dict = field(default_factory=dict)
    comparison: str = ""


@dataclass
class RepairSummary:
    root_cause: str = ""
    fix_locations: list[FixLocation] = field(default_factory=list)
    records: list[DebugRecord] = field(default_factory=list)
    incomplete: bool = False
    reason: str = ""


def record_to_json(record: DebugRecord) -> dict:
    return {
        "round": record.round,
        "target": str(record.target),
        "psi": record.psi,
        "gamma": record.gamma,
        "comparison": record.comparison,
    }


def summary_to_json(summary: RepairSummary) -> dict:
    return {
        "root_cause": summary.root_cause,
        "fix_locations": [
            {
                "file": loc.location.file,
                "line": loc.location.line,
                "rationale": loc.rationale,
            }
            for loc in summary.fix_locations
        ],
        "rounds": len(summary.records),
        "records": [record_to_json(r) for r in summary.records],
        "incomplete": summary.incomplete,
        "reason": summary.reason,
    }


class AgentTranscript:
    """Append-only log of messages and phase events.

    Serialized as one JSON object per line.  Contains no timestamps and no
    absolute paths, so two scripted runs of the same job serialize
    byte-identically.
    """

    def __init__(self):
        self.entries: list[dict] = []
        self.approx_tokens = 0

    def add_message(self, message: ChatMessage) -> int:
        entry = {"type": "message", **message_to_json(message)}
        self.entries.append(entry)
        self.approx_tokens += _approx_tokens(message)
        return len(self.entries) - 1

    def add_event(self, event: str, **fields) -> int:
        entry: dict = {"type": "event", "event": event}
        entry.update(fields)
        self.entries.append(entry)
        return len(self.entries) - 1

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.entries)

    def save(self, path):
        Path(path).write_text(self.to_jsonl())

    def render_text(self) -> str:
        """All model-visible text: message contents plus tool-call arguments."""
        parts = []
        for entry in self.entries:
            if entry.get("type") != "message":
                continue
            if entry.get("content"):
                parts.append(entry["content"])
            for call in entry.get("tool_calls", []):
                parts.append(json.dumps(call.get("arguments", {}), sort_keys=True))
        return "\n".join(parts)


def _approx_tokens(message: ChatMessage) -> int:
    # whitespace-split word count is close enough for a budget cap
    total = len(message.content.split())
    for call in message.tool_calls:
        total += len(json.dumps(call.arguments).split()) + 1
    return total


TOOL_SCHEMAS: tuple[ToolSchema, ...] = (
    ToolSchema(
        "run_program",
        "Run the program on the proof of concept from the start and report how it "
        "terminates.",
        (),
    ),
    ToolSchema(
        "run_to_line",
        "Restart the program and stop at a breakpoint. Reports the local variables "
        "at the stop, or the crash if it happens before the breakpoint is reached.",
        (
            ToolParam("file", "string", "project-relative source file"),
            ToolParam("line", "integer", "1-based line to stop at"),
            ToolParam(
                "hit_count",
                "integer",
                "stop on the n-th time the line is reached (default 1)",
                required=False,
            ),
        ),
    ),
    ToolSchema(
        "print_value",
        "Evaluate an expression in the current stack frame of the stopped program.",
        (ToolParam("expression", "string", "C expression, e.g. a variable name"),),
    ),
    ToolSchema(
        "backtrace",
        "Show the full call stack of the stopped program.",
        (),
    ),
    ToolSchema(
        "select_frame",
        "Switch the current stack frame; print_value then evaluates there.",
        (ToolParam("index", "integer", "frame number from backtrace, 0 is innermost"),),
    ),
    ToolSchema(
        "get_file_content",
        "Read a line range from a project source file, with line numbers.",
        (
            ToolParam("path", "string", "project-relative file path"),
            ToolParam("start_line", "integer", "first line, 1-based"),
            ToolParam("end_line", "integer", "last line, inclusive"),
        ),
    ),
    ToolSchema(
        "definition",
        "Find where a function, type, macro, or global is defined and show its "
        "source.",
        (ToolParam("symbol", "string", "identifier to look up"),),
    ),
    ToolSchema(
        "summary",
        "Summarize a symbol: kind, location, signature, typedef chains, and the "
        "comment above it.",
        (ToolParam("symbol", "string", "identifier to look up"),),
    ),
    ToolSchema(
        "function_body",
        "Show the numbered source of a function definition.",
        (ToolParam("name", "string", "function name"),),
    ),
    ToolSchema(
        "report_summary",
        "Finish the investigation by reporting the root cause and where a fix "
        "belongs. This ends the debugging phase.",
        (
            ToolParam("root_cause", "string", "concise root cause of the crash"),
            ToolParam(
                "fix_locations",
                "array",
                'list of {"file", "line", "rationale"} objects, preferred first',
            ),
        ),
    ),
)

TOOL_NAMES = frozenset(s.name for s in TOOL_SCHEMAS)


# -- rendering -----------------------------------------------------------------


def render_eval(result: EvalResult) -> str:
    match result:
        case Value(text, type_name):
            return f"{text} ({type_name})" if type_name else text
        case OptimizedOut():
            return "<optimized out>"
        case EvalError(message):
            return f"<error: {message}>"
    raise TypeError(f"not an EvalResult: {result!r}")


def _kind_text(report: CrashReport) -> str:
    match report.kind:
        case Signal(name):
            return f"fatal signal {name}"
        case Sanitizer(check):
            return f"sanitizer check {check}"
        case Assertion():
            return "assertion failure"
        case NoCrash():
            return "no crash"
    raise TypeError(f"not a CrashKind: {report.kind!r}")


def render_crash(report: CrashReport, frame_limit: int = PROMPT_FRAME_LIMIT) -> str:
    lines = [f"Crash class: {report.crash_class.value if report.crash_class else 'unknown'}"]
    lines.append(f"Cause: {_kind_text(report)}")
    if report.message:
        lines.append(f"Message: {report.message}")
    if report.location:
        lines.append(f"Location: {report.location}")
    if report.backtrace:
        lines.append("Backtrace:")
        for frame in report.backtrace[:frame_limit]:
            lines.append(f"  {frame}")
        omitted = len(report.backtrace) - frame_limit
        if omitted > 0:
            lines.append(f"  ... {omitted} more frames omitted")
    return "\n".join(lines)


def render_constraint(doc: CfcDocument) -> str:
    text = doc.nl_text
    if doc.anchor is not None:
        text = f"{text.rstrip('.')} at line {doc.anchor.line}"
    return text


SYSTEM_PROMPT = (
    "You are a debugging agent investigating a crash in a C program. The crash "
    "is reproducible under a debugger.\n"
    "Use the tools to inspect the program: run_to_line restarts the program and "
    "stops at a breakpoint, print_value evaluates an expression at the stop, "
    "backtrace and select_frame navigate the stack, and get_file_content, "
    "definition, summary, and function_body retrieve source context.\n"
    "Work in rounds: before each run_to_line you will be asked to state the "
    "expected program state at the target line; after it you will see the actual "
    "state. Compare the two to narrow down the bug.\n"
    "When you know the root cause and where a fix belongs, call report_summary "
    "with root_cause and fix_locations. Do not write patch text; that happens in "
    "a later phase."
)


def build_initial_prompt(
    crash: CrashReport, cfc: Optional[CfcDocument]
) -> list[ChatMessage]:
    if not crash.crashed:
        raise ValueError("cannot start a debug phase from a NoCrash report")
    body = [
        "The program crashed while running the proof of concept.",
        "",
        render_crash(crash),
    ]
    if cfc is not None:
        body.append("")
        body.append(
            "The crash cannot occur if the following crash-free constraint holds: "
            + render_constraint(cfc)
        )
    body.append("")
    body.append("Find the root cause and the locations where a fix belongs.")
    return [
        ChatMessage(role="system", content=SYSTEM_PROMPT),
        ChatMessage(role="user", content="\n".join(body)),
    ]


# -- tool execution ------------------------------------------------------------


class ToolExecutor:
    """Executes agent tool calls against a debug session and a source index.

    Tool failures come back as error strings, never exceptions: the agent loop
    forwards them to the model as tool results.
    """

    def __init__(
        self,
        project: ProjectSpec,
        crash: Optional[CrashReport] = None,
        debugger: str = "gdb",
        debugger_flags: Optional[list[str]] = None,
    ):
        self.project = project
        self.debugger = debugger
        self.debugger_flags = list(debugger_flags or [])
        crash_file = crash.location.file if crash and crash.location else None
        self.index = SourceIndex(project.root, crash_file=crash_file)
        self.session: Optional[DebugSession] = None

    def close(self):
        if self.session is not None:
            self.session.kill()
            self.session = None

    # each execution runs in a fresh session so sanitizer logs and the
    # process state can never leak across rounds
    def _fresh_session(self) -> DebugSession:
        if self.session is not None:
            self.session.kill()
        self.session = DebugSession(
            self.project, debugger=self.debugger, extra_flags=self.debugger_flags
        )
        return self.session

    def run_program(self) -> tuple[str, dict]:
        try:
            session = self._fresh_session()
            outcome = session.run_to_completion()
        except DebuggerError as exc:
            return f"error: {exc}", {"error": str(exc)}
        return self._render_outcome(outcome, awaiting_stop=False)

    def run_to_line(self, file: str, line: int, hit_count: int = 1) -> tuple[str, dict]:
        try:
            session = self._fresh_session()
            outcome = session.run_to_line(file, line, hit_count=hit_count)
        except DebuggerError as exc:
            return f"error: {exc}", {"error": str(exc)}
        return self._render_outcome(outcome, awaiting_stop=True)

    def _render_outcome(self, outcome, awaiting_stop: bool) -> tuple[str, dict]:
        match outcome:
            case StopInfo(location, local_vars):
                rendered = {name: render_eval(v) for name, v in sorted(local_vars.items())}
                lines = [f"Stopped at {location}."]
                if rendered:
                    lines.append("Locals:")
                    lines.extend(f"  {name} = {text}" for name, text in rendered.items())
                else:
                    lines.append("No locals in this frame.")
                gamma = {"stopped_at": str(location), "locals": rendered}
                return "\n".join(lines), gamma
            case EarlierCrash(report):
                header = (
                    "The program crashed before reaching the breakpoint."
                    if awaiting_stop
                    else "The program crashed."
                )
                text = header + "\n" + render_crash(report)
                gamma = {
                    "crash": {
                        "class": report.crash_class.value if report.crash_class else None,
                        "message": report.message,
                        "location": str(report.location) if report.location else None,
                    }
                }
                return text, gamma
            case ExitedCleanly(code):
                text = f"The program exited with code {code} without crashing."
                return text, {"exited": code}
        raise TypeError(f"unexpected run outcome: {outcome!r}")

    def print_value(self, expression: str) -> str:
        if self.session is None:
            return "error: no program is running; use run_to_line first"
        try:
            result = self.session.print_value(expression)
        except DebuggerError as exc:
            return f"error: {exc}"
        if isinstance(result, EvalError):
            return f"error: {result.message}"
        return f"{expression} = {render_eval(result)}"

    def backtrace(self) -> str:
        if self.session is None:
            return "error: no program is running; use run_to_line first"
        try:
            frames = self.session.backtrace()
        except DebuggerError as exc:
            return f"error: {exc}"
        return "\n".join(str(f) for f in frames)

    def select_frame(self, index: int) -> str:
        if self.session is None:
            return "error: no program is running; use run_to_line first"
        try:
            self.session.select_frame(index)
            frames = self.session.backtrace()
        except DebuggerError as exc:
            return f"error: {exc}"
        return f"Selected frame {frames[index]}"

    def get_file_content(self, path: str, start_line: int, end_line: int) -> str:
        try:
            return self.index.get_file_content(path, start_line, end_line)
        except (PathEscapeError, MissingFileError) as exc:
            return f"error: {exc}"
        except ValueError as exc:
            return f"error: {exc}"

    def definition(self, symbol: str) -> str:
        try:
            entries = self.index.definition(symbol)
        except UnknownSymbolError:
            return f"error: no definition found for '{symbol}'"
        parts = [
            f"{entry['kind']} at {entry['location']}:\n{entry['text']}"
            for entry in entries[:3]
        ]
        return "\n\n".join(parts)

    def summary(self, symbol: str) -> str:
        try:
            info = self.index.summary(symbol)
        except UnknownSymbolError:
            return f"error: unknown symbol '{symbol}'"
        lines = [f"{info['kind']} {info['name']} at {info['location']}"]
        if info["signature"]:
            lines.append(f"signature: {info['signature']}")
        if info["comment"]:
            lines.append(f"comment: {info['comment']}")
        for name, chain in sorted(info["alias_chains"].items()):
            lines.append(f"{name}: " + " -> ".join(chain))
        return "\n".join(lines)

    def function_body(self, name: str) -> str:
        try:
            body = self.index.function_body(name)
        except UnknownSymbolError:
            return f"error: no function named '{name}'"
        except DeclarationOnlyError:
            return f"error: '{name}' is only declared in this project, not defined"
        return f"{body['file']}:{body['start_line']}-{body['end_line']}\n{body['text']}"


# -- argument validation ---------------------------------------------------------


class _BadArguments(Exception):
    pass


def _arg_str(args: dict, name: str) -> str:
    value = args.get(name)
    if not isinstance(value, str) or not value.strip():
        raise _BadArguments(f"argument '{name}' must be a non-empty string")
    return value


def _arg_int(args: dict, name: str, default: Optional[int] = None, minimum: int = 1) -> int:
    value = args.get(name, default)
    if value is None:
        raise _BadArguments(f"argument '{name}' is required")
    if isinstance(value, bool) or not isinstance(value, int):
        # models sometimes send numbers as strings
        if isinstance(value, str) and re.fullmatch(r"-?\d+", value.strip()):
            value = int(value)
        else:
            raise _BadArguments(f"argument '{name}' must be an integer")
    if value < minimum:
        raise _BadArguments(f"argument '{name}' must be >= {minimum}")
    return value


# -- the phase loop --------------------------------------------------------------


class _DebugPhase:
    def __init__(
        self,
        project: ProjectSpec,
        crash: CrashReport,
        cfc: Optional[CfcDocument],
        llm,
        executor: ToolExecutor,
        caps: Caps,
        params: GenerationParams,
        transcript: AgentTranscript,
    ):
        self.project = project
        self.crash = crash
        self.cfc = cfc
        self.llm = llm
        self.executor = executor
        self.caps = caps
        self.params = params
        self.transcript = transcript
        self.messages: list[ChatMessage] = []
        self.records: list[DebugRecord] = []
        self.tool_calls_used = 0
        self.pending_comparison: Optional[DebugRecord] = None
        self._psi_index = -1

    def _push(self, message: ChatMessage) -> int:
        self.messages.append(message)
        return self.transcript.add_message(message)

    def _complete(self) -> tuple[ChatMessage, int]:
        reply = self.llm.complete(self.messages, TOOL_SCHEMAS, self.params)
        index = self._push(reply)
        return reply, index

    def _incomplete(self, reason: str) -> RepairSummary:
        self.transcript.add_event("phase-end", outcome="incomplete", reason=reason)
        return RepairSummary(records=self.records, incomplete=True, reason=reason)

    def run(self) -> RepairSummary:
        for message in build_initial_prompt(self.crash, self.cfc):
            self._push(message)
        stalled_replies = 0
        while True:
            reply, _ = self._complete()
            if self._over_token_budget():
                return self._incomplete("token budget exceeded")
            self._capture_comparison(reply)
            if not reply.tool_calls:
                stalled_replies += 1
                if stalled_replies >= 3:
                    return self._incomplete("model stopped issuing tool calls")
                self._push(ChatMessage(role="user", content=NUDGE_PROMPT))
                continue
            stalled_replies = 0
            for call in reply.tool_calls:
                if self.tool_calls_used >= self.caps.max_tool_calls:
                    return self._incomplete(
                        f"tool call cap reached ({self.caps.max_tool_calls})"
                    )
                if call.name == "run_to_line" and len(self.records) >= self.caps.max_rounds:
                    return self._incomplete(
                        f"debug round cap reached ({self.caps.max_rounds} run_to_line calls)"
                    )
                self.tool_calls_used += 1
                if call.name == "report_summary":
                    summary = self._accept_summary(call)
                    if summary is not None:
                        self.transcript.add_event("phase-end", outcome="summary")
                        return summary
                elif call.name == "run_to_line":
                    self._run_round(call)
                else:
                    self._push(
                        ChatMessage(
                            role="tool",
                            content=self._dispatch_simple(call),
                            tool_call_id=call.id,
                        )
                    )

    def _over_token_budget(self) -> bool:
        return (
            self.caps.max_tokens is not None
            and self.transcript.approx_tokens > self.caps.max_tokens
        )

    def _capture_comparison(self, reply: ChatMessage):
        if self.pending_comparison is not None and reply.content.strip():
            self.pending_comparison.comparison = reply.content.strip()
            self.pending_comparison = None

    # -- plain tools -------------------------------------------------------

    def _dispatch_simple(self, call) -> str:
        args = call.arguments
        try:
            match call.name:
                case "run_program":
                    text, _ = self.executor.run_program()
                    return text
                case "print_value":
                    return self.executor.print_value(_arg_str(args, "expression"))
                case "backtrace":
                    return self.executor.backtrace()
                case "select_frame":
                    return self.executor.select_frame(_arg_int(args, "index", minimum=0))
                case "get_file_content":
                    return self.executor.get_file_content(
                        _arg_str(args, "path"),
                        _arg_int(args, "start_line"),
                        _arg_int(args, "end_line"),
                    )
                case "definition":
                    return self.executor.definition(_arg_str(args, "symbol"))
                case "summary":
                    return self.executor.summary(_arg_str(args, "symbol"))
                case "function_body":
                    return self.executor.function_body(_arg_str(args, "name"))
                case _:
                    return f"error: unknown tool '{call.name}'"
        except _BadArguments as exc:
            return f"error: {exc}"

    # -- the expectation gate ------------------------------------------------

    def _gate_expectation(self) -> str:
        prompt = CHAIN_OF_THOUGHT_PROMPT if self.cfc is not None else NO_CFC_THOUGHT_PROMPT
        last_index = -1
        for _ in range(2):
            self._push(ChatMessage(role="user", content=prompt))
            reply, last_index = self._complete()
            if not reply.tool_calls and reply.content.strip():
                self._psi_index = last_index
                return reply.content.strip()
            # a violation: tool calls are bounced unexecuted, then one re-prompt
            for call in reply.tool_calls:
                self._push(
                    ChatMessage(
                        role="tool",
                        content=GATE_VIOLATION_RESULT,
                        tool_call_id=call.id,
                    )
                )
        self._psi_index = last_index
        return PSI_PLACEHOLDER

    def _run_round(self, call):
        args = call.arguments
        try:
            file = _arg_str(args, "file")
            line = _arg_int(args, "line")
            hit_count = _arg_int(args, "hit_count", default=1)
        except _BadArguments as exc:
            self._push(
                ChatMessage(role="tool", content=f"error: {exc}", tool_call_id=call.id)
            )
            return
        psi = self._gate_expectation()
        text, gamma = self.executor.run_to_line(file, line, hit_count)
        gamma_index = self._push(
            ChatMessage(role="tool", content=text, tool_call_id=call.id)
        )
        record = DebugRecord(
            round=len(self.records) + 1,
            target=SourceLocation(file, line),
            psi=psi,
            gamma=gamma,
        )
        self.records.append(record)
        self.transcript.add_event(
            "round",
            round=record.round,
            target=str(record.target),
            psi_index=self._psi_index,
            gamma_index=gamma_index,
        )
        self.pending_comparison = record

    # -- termination -----------------------------------------------------------

    def _accept_summary(self, call) -> Optional[RepairSummary]:
        parsed, problem = _parse_summary_args(call.arguments, Path(self.project.root))
        if parsed is None:
            self._push(
                ChatMessage(role="tool", content=f"error: {problem}", tool_call_id=call.id)
            )
            return None
        root_cause, fix_locations = parsed
        self._push(
            ChatMessage(role="tool", content="summary recorded", tool_call_id=call.id)
        )
        return RepairSummary(
            root_cause=root_cause,
            fix_locations=fix_locations,
            records=self.records,
        )


def _parse_summary_args(
    args: dict, root: Optional[Path]
) -> tuple[Optional[tuple[str, list[FixLocation]]], str]:
    root_cause = args.get("root_cause")
    if not isinstance(root_cause, str) or not root_cause.strip():
        return None, "root_cause must be a non-empty string"
    raw = args.get("fix_locations")
    if isinstance(raw, str):
        # tolerate a JSON-encoded array
        try:
            raw = json.loads(raw)
        except ValueError:
            return None, "fix_locations must be a list of objects"
    if not isinstance(raw, list) or not raw:
        return None, "fix_locations must be a non-empty list"
    locations = []
    for item in raw:
        if not isinstance(item, dict):
            return None, "each fix location must be an object with file and line"
        try:
            file = _arg_str(item, "file")
            line = _arg_int(item, "line")
        except _BadArguments as exc:
            return None, f"bad fix location: {exc}"
        rationale = item.get("rationale", "")
        if not isinstance(rationale, str):
            rationale = str(rationale)
        if root is not None and not (root / file).is_file():
            return None, f"fix location file not found in the project: {file}"
        locations.append(FixLocation(SourceLocation(file, line), rationale))
    return (root_cause.strip(), locations), ""


def run_debug_phase(
    project: ProjectSpec,
    crash: CrashReport,
    cfc: Optional[CfcDocument],
    llm,
    caps: Optional[Caps] = None,
    params: Optional[GenerationParams] = None,
    debugger: str = "gdb",
    debugger_flags: Optional[list[str]] = None,
    transcript: Optional[AgentTranscript] = None,
) -> tuple[RepairSummary, AgentTranscript]:
    """Run one debugging phase to a RepairSummary.

    Tool failures are fed back to the model; transport failures from the LLM
    backend propagate to the caller, who still holds the transcript.
    """
    caps = caps if caps is not None else Caps()
    params = params if params is not None else GenerationParams()
    transcript = transcript if transcript is not None else AgentTranscript()
    executor = ToolExecutor(project, crash, debugger=debugger, debugger_flags=debugger_flags)
    phase = _DebugPhase(project, crash, cfc, llm, executor, caps, params, transcript)
    try:
        summary = phase.run()
    finally:
        executor.close()
    return summary, transcript


# -- summarize fallback -----------------------------------------------------------

SUMMARIZE_SYSTEM_PROMPT = (
    "You are reviewing notes from a debugging session on a crashing C program. "
    "Derive the root cause and the locations where a fix belongs."
)

SUMMARIZE_FORMAT_PROMPT = (
    "Reply with a single JSON object inside a ```json code fence:\n"
    '{"root_cause": "...", "fix_locations": [{"file": "...", "line": 1, '
    '"rationale": "..."}]}'
)

_JSON_FENCE = re.compile(r"```(?:json)?\s*(\{.*?\})\s*```", re.DOTALL)


def summarize(
    records: list[DebugRecord],
    llm,
    project: Optional[ProjectSpec] = None,
    params: Optional[GenerationParams] = None,
    transcript: Optional[AgentTranscript] = None,
) -> RepairSummary:
    """Ask for root cause and fix locations given the recorded comparisons.

    Used when a phase ended without an explicit report_summary call but did
    gather records.
    """
    if not records:
        return RepairSummary(incomplete=True, reason="no debug records to summarize")
    params = params if params is not None else GenerationParams()
    blocks = []
    for record in records:
        blocks.append(
            f"Round {record.round} (target {record.target})\n"
            f"Expected: {record.psi}\n"
            f"Observed: {json.dumps(record.gamma, sort_keys=True)}\n"
            f"Comparison: {record.comparison or '<none>'}"
        )
    messages = [
        ChatMessage(role="system", content=SUMMARIZE_SYSTEM_PROMPT),
        ChatMessage(
            role="user",
            content="\n\n".join(blocks) + "\n\n" + SUMMARIZE_FORMAT_PROMPT,
        ),
    ]
    if transcript is not None:
        for message in messages:
            transcript.add_message(message)
    reply = llm.complete(messages, [], params)
    if transcript is not None:
        transcript.add_message(reply)
    data = _extract_json(reply.content)
    if data is None:
        return RepairSummary(
            records=records, incomplete=True, reason="summary reply was not valid JSON"
        )
    root = Path(project.root) if project is not None else None
    parsed, problem = _parse_summary_args(data, root)
    if parsed is None:
        return RepairSummary(records=records, incomplete=True, reason=problem)
    root_cause, locations = parsed
    return RepairSummary(root_cause=root_cause, fix_locations=locations, records=records)


def _extract_json(text: str) -> Optional[dict]:
    candidates = [m.group(1) for m in _JSON_FENCE.finditer(text)]
    stripped = text.strip()
    if stripped.startswith("{"):
        candidates.append(stripped)
    for candidate in candidates:
        try:
            data = json.loads(candidate)
        except ValueError:
            continue
        if isinstance(data, dict):
            return data
    return None
