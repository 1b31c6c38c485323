"""Patch-generation phase: structured edits, syntax precheck, validation, retries.

The patch agent starts a fresh conversation seeded with the debug-phase
summary and code context. Candidate patches are line-range edits applied to a
scratch copy of the project, never to the original tree. A patch is accepted
only when the rebuilt program no longer crashes on the proof of concept.
"""

from __future__ import annotations

import dataclasses
import difflib
import json
import re
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .debugger import RunTimeoutError
from .gateway import ChatMessage, GenerationParams
from .orchestrator import (
    TOOL_SCHEMAS,
    AgentTranscript,
    Caps,
    RepairSummary,
    ToolExecutor,
    render_crash,
    run_debug_phase,
    summarize,
)
from .project import ProjectSpec, build_project
from .report import CrashReport
from .triage import run_poc


class PatchFormatError(Exception):
    """The model never produced parseable edit blocks for this attempt."""


class ApplyConflict(Exception):
    """Edits overlap each other or no longer match the tree."""


@dataclass
class Patch:
    file: str
    start_line: int
    end_line: int
    replacement: str
    insertion: bool = False  # insert before start_line instead of replacing
    origin: int = 0  # attempt number that produced this edit
    expected: Optional[list[str]] = None  # original lines, for drift detection

    def __post_init__(self):
        if self.start_line < 1:
            raise ValueError("start_line must be >= 1")
        if self.insertion:
            if self.end_line != self.start_line:
                raise ValueError("an insertion has start_line == end_line")
        elif self.end_line < self.start_line:
            raise ValueError("end_line must be >= start_line")


# -- validation results --------------------------------------------------------


@dataclass(frozen=True)
class SyntaxRejected:
    reason: str


@dataclass(frozen=True)
class BuildFailed:
    log: str


@dataclass(frozen=True)
class StillCrashes:
    report: CrashReport


@dataclass(frozen=True)
class Timeout:
    stage: str  # "build" or "run"


@dataclass(frozen=True)
class Fixed:
    pass


ValidationResult = Union[SyntaxRejected, BuildFailed, StillCrashes, Timeout, Fixed]


@dataclass
class Attempt:
    phase: int
    attempt: int
    patches: list[Patch]
    result: ValidationResult


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts_per_phase: int = 3
    max_debug_phases: int = 2

    def __post_init__(self):
        if self.max_attempts_per_phase < 1 or self.max_debug_phases < 1:
            raise ValueError("retry policy limits must be positive")


@dataclass
class RepairOutcome:
    status: str  # "fixed" | "exhausted"
    attempts: list[Attempt] = field(default_factory=list)
    accepted: list[Patch] = field(default_factory=list)
    debug_phases: int = 0
    patched_root: str = ""
    summaries: list[RepairSummary] = field(default_factory=list)

    @property
    def final_summary(self) -> Optional[RepairSummary]:
        return self.summaries[-1] if self.summaries else None


# -- the edit block format -------------------------------------------------------

_EDIT_BLOCK = re.compile(r"```edit[ \t]*\n(.*?)\n?```", re.DOTALL)
_REPLACE_HEADER = re.compile(r"replace:\s*(\d+)(?:\s*-\s*(\d+))?\s*$")
_INSERT_HEADER = re.compile(r"insert-before:\s*(\d+)\s*$")

EDIT_FORMAT_HELP = (
    "```edit\n"
    "file: path/from/project/root.c\n"
    "replace: START-END\n"
    "replacement code\n"
    "```\n"
    "Line numbers are 1-based and inclusive. `replace: N` edits a single line; "
    "use `insert-before: N` instead of `replace:` to insert new lines without "
    "removing any. An empty body deletes the range. Use one block per edited "
    "region."
)


def parse_edit_blocks(text: str, origin: int = 0) -> list[Patch]:
    """Extract structured edits from a model reply.

    Raises PatchFormatError when no well-formed block is present.
    """
    blocks = _EDIT_BLOCK.findall(text)
    if not blocks:
        raise PatchFormatError("no ```edit blocks in the reply")
    patches = []
    for block in blocks:
        lines = block.split("\n")
        if len(lines) < 2:
            raise PatchFormatError("an edit block needs a file: and a range header")
        file_header = lines[0].strip()
        if not file_header.startswith("file:"):
            raise PatchFormatError(f"expected 'file:' first, got {file_header!r}")
        file = file_header[len("file:") :].strip()
        if not file:
            raise PatchFormatError("empty file name in edit block")
        range_header = lines[1].strip()
        body = "\n".join(lines[2:])
        replace = _REPLACE_HEADER.fullmatch(range_header)
        insert = _INSERT_HEADER.fullmatch(range_header)
        if replace:
            start = int(replace.group(1))
            end = int(replace.group(2)) if replace.group(2) else start
            if end < start:
                raise PatchFormatError(f"backwards range in {range_header!r}")
            patches.append(Patch(file, start, end, body, origin=origin))
        elif insert:
            line = int(insert.group(1))
            if not body:
                raise PatchFormatError("an insertion needs a non-empty body")
            patches.append(Patch(file, line, line, body, insertion=True, origin=origin))
        else:
            raise PatchFormatError(f"bad range header {range_header!r}")
    return patches


# -- syntax precheck ---------------------------------------------------------------

_OPENERS = "([{"
_CLOSERS = ")]}"
_MATCH = {")": "(", "]": "[", "}": "{"}


def find_imbalance(text: str) -> Optional[tuple[int, int, str]]:
    """First bracket imbalance outside strings, chars, and comments.

    Returns (line, column, bracket), both 1-based, or None when balanced.
    A mismatched closer reports the opener it failed to match.
    """
    stack: list[tuple[str, int, int]] = []
    state = "code"  # code | line-comment | block-comment | string | char
    line, col = 1, 0
    i = 0
    while i < len(text):
        ch = text[i]
        nxt = text[i + 1] if i + 1 < len(text) else ""
        if ch == "\n":
            line += 1
            col = 0
            if state == "line-comment":
                state = "code"
            i += 1
            continue
        col += 1
        if state == "code":
            if ch == "/" and nxt == "/":
                state = "line-comment"
                i += 2
                col += 1
                continue
            if ch == "/" and nxt == "*":
                state = "block-comment"
                i += 2
                col += 1
                continue
            if ch == '"':
                state = "string"
            elif ch == "'":
                state = "char"
            elif ch in _OPENERS:
                stack.append((ch, line, col))
            elif ch in _CLOSERS:
                if not stack:
                    return (line, col, ch)
                top, top_line, top_col = stack[-1]
                if top != _MATCH[ch]:
                    return (top_line, top_col, top)
                stack.pop()
        elif state == "block-comment":
            if ch == "*" and nxt == "/":
                state = "code"
                i += 2
                col += 1
                continue
        elif state in ("string", "char"):
            if ch == "\\":
                i += 2
                col += 1
                continue
            if state == "string" and ch == '"':
                state = "code"
            elif state == "char" and ch == "'":
                state = "code"
        i += 1
    if stack:
        ch, ln, c = stack[0]
        return (ln, c, ch)
    return None


def precheck_syntax(original_text: str, patches: list[Patch]) -> Optional[SyntaxRejected]:
    """Balance check after virtually applying all patches to one file's text."""
    try:
        patched = apply_to_text(original_text, patches)
    except ApplyConflict as exc:
        return SyntaxRejected(str(exc))
    found = find_imbalance(patched)
    if found is None:
        return None
    line, col, ch = found
    return SyntaxRejected(f"unbalanced {ch!r} at line {line}, column {col}")


# -- application --------------------------------------------------------------------


def _interval(patch: Patch) -> tuple[int, int]:
    # insertions occupy a zero-width point just before start_line
    if patch.insertion:
        return (patch.start_line, patch.start_line - 1)
    return (patch.start_line, patch.end_line)


def _check_overlaps(patches: list[Patch]):
    ordered = sorted(patches, key=lambda p: _interval(p))
    for a, b in zip(ordered, ordered[1:]):
        a_start, a_end = _interval(a)
        b_start, b_end = _interval(b)
        if b_start <= a_end or (a.insertion and b.insertion and a_start == b_start):
            raise ApplyConflict(
                f"overlapping edits in {a.file}: "
                f"lines {a_start}-{a_end} and {b_start}-{b_end}"
            )


def apply_to_text(text: str, patches: list[Patch]) -> str:
    """Apply one file's patches to its text; used for both precheck and apply."""
    lines = text.split("\n")
    _check_overlaps(patches)
    # bottom-up, and a replacement before an insertion at the same line, so
    # earlier coordinates never shift under a pending edit
    order = sorted(
        patches, key=lambda p: (p.start_line, 0 if p.insertion else 1), reverse=True
    )
    for patch in order:
        if patch.insertion:
            if patch.start_line > len(lines) + 1:
                raise ApplyConflict(
                    f"{patch.file}: insertion point {patch.start_line} is past "
                    f"the end of the file ({len(lines)} lines)"
                )
        elif patch.end_line > len(lines):
            raise ApplyConflict(
                f"{patch.file}: range {patch.start_line}-{patch.end_line} is out "
                f"of bounds ({len(lines)} lines)"
            )
        if patch.expected is not None and not patch.insertion:
            current = lines[patch.start_line - 1 : patch.end_line]
            if current != patch.expected:
                raise ApplyConflict(
                    f"{patch.file}: lines {patch.start_line}-{patch.end_line} "
                    "changed since the patch was generated"
                )
        body = patch.replacement.split("\n") if patch.replacement else []
        if patch.insertion:
            lines[patch.start_line - 1 : patch.start_line - 1] = body
        else:
            lines[patch.start_line - 1 : patch.end_line] = body
    return "\n".join(lines)


@dataclass
class PatchedTree:
    root: Path
    applied: list[Patch]


def apply_patch(
    project_root, patches: list[Patch], scratch_dir=None
) -> PatchedTree:
    """Apply edits to a fresh scratch copy of the project tree.

    The original tree is never written to. Raises ApplyConflict on
    overlapping edits, out-of-bounds ranges, or original-line drift.
    """
    source = Path(project_root).resolve()
    dest = Path(scratch_dir) if scratch_dir else Path(tempfile.mkdtemp(prefix="patched-"))
    dest.mkdir(parents=True, exist_ok=True)
    work = dest / "tree"
    if work.exists():
        shutil.rmtree(work)
    shutil.copytree(source, work, ignore=shutil.ignore_patterns(".git"))
    by_file: dict[str, list[Patch]] = {}
    for patch in patches:
        by_file.setdefault(patch.file, []).append(patch)
    for file, file_patches in by_file.items():
        target = (work / file).resolve()
        if not str(target).startswith(str(work.resolve())):
            raise ApplyConflict(f"patch path escapes the project: {file}")
        if not target.is_file():
            raise ApplyConflict(f"patched file does not exist: {file}")
        target.write_text(apply_to_text(target.read_text(), file_patches))
    return PatchedTree(root=work, applied=list(patches))


# -- validation ----------------------------------------------------------------------


def validate(
    project: ProjectSpec,
    tree: PatchedTree,
    debugger: str = "gdb",
    debugger_flags: Optional[list[str]] = None,
) -> ValidationResult:
    """Rebuild the patched tree and re-run the proof of concept."""
    build = build_project(project, root=tree.root)
    if build.timed_out:
        return Timeout("build")
    if not build.ok:
        return BuildFailed(_tail(build.log))
    patched_project = dataclasses.replace(project, root=str(tree.root))
    try:
        report = run_poc(patched_project, debugger=debugger, debugger_flags=debugger_flags)
    except RunTimeoutError:
        return Timeout("run")
    if report.crashed:
        return StillCrashes(report)
    return Fixed()


def _tail(text: str, limit: int = 2000) -> str:
    return text[-limit:] if len(text) > limit else text


def render_validation(result: ValidationResult) -> str:
    match result:
        case SyntaxRejected(reason):
            return f"the patch was rejected before building: {reason}"
        case BuildFailed(log):
            return f"the patched project failed to compile:\n{log}"
        case StillCrashes(report):
            return "the program still crashes after the patch:\n" + render_crash(report)
        case Timeout(stage):
            return f"the attempt timed out during the {stage} step"
        case Fixed():
            return "the patch fixed the crash"
    raise TypeError(f"not a ValidationResult: {result!r}")


def validation_to_json(result: ValidationResult) -> dict:
    match result:
        case SyntaxRejected(reason):
            return {"status": "syntax-rejected", "reason": reason}
        case BuildFailed(log):
            return {"status": "build-failed", "log": log}
        case StillCrashes(report):
            return {
                "status": "still-crashes",
                "crash_class": report.crash_class.value if report.crash_class else None,
                "message": report.message,
            }
        case Timeout(stage):
            return {"status": "timeout", "stage": stage}
        case Fixed():
            return {"status": "fixed"}
    raise TypeError(f"not a ValidationResult: {result!r}")


# -- patch generation ------------------------------------------------------------------

PATCH_SYSTEM_PROMPT = (
    "You are fixing a crash in a C program. You are given the root cause found "
    "by a debugging session, the candidate fix locations, and the code around "
    "them.\n"
    "You may call get_file_content, definition, summary, or function_body to "
    "read more context before deciding.\n"
    "Emit the fix as one or more edit blocks, nothing else, in this exact "
    "format:\n" + EDIT_FORMAT_HELP + "\n"
    "Keep the edit minimal and do not change unrelated code."
)

STATIC_TOOL_NAMES = ("get_file_content", "definition", "summary", "function_body")
PATCH_TOOL_SCHEMAS = tuple(s for s in TOOL_SCHEMAS if s.name in STATIC_TOOL_NAMES)

CONTEXT_LINES = 8
MAX_GENERATION_TURNS = 8


def _location_context(index, file: str, line: int) -> str:
    start = max(1, line - CONTEXT_LINES)
    return index.get_file_content(file, start, line + CONTEXT_LINES)


def build_patch_prompt(
    summary: RepairSummary,
    index,
    feedback: Optional[ValidationResult] = None,
) -> list[ChatMessage]:
    if summary.incomplete:
        raise ValueError("cannot generate a patch from an incomplete summary")
    if not summary.fix_locations:
        raise ValueError("summary has no fix locations")
    body = [f"Root cause: {summary.root_cause}", "", "Fix locations, preferred first:"]
    for rank, fix in enumerate(summary.fix_locations, start=1):
        label = f"{rank}. {fix.location}"
        if fix.rationale:
            label += f" ({fix.rationale})"
        body.append(label)
        body.append(_location_context(index, fix.location.file, fix.location.line))
        body.append("")
    if feedback is not None:
        body.append("A previous attempt failed: " + render_validation(feedback))
        body.append("")
    body.append("Write the fix now as edit blocks.")
    return [
        ChatMessage(role="system", content=PATCH_SYSTEM_PROMPT),
        ChatMessage(role="user", content="\n".join(body)),
    ]


def generate_patch(
    summary: RepairSummary,
    llm,
    project: ProjectSpec,
    feedback: Optional[ValidationResult] = None,
    params: Optional[GenerationParams] = None,
    transcript: Optional[AgentTranscript] = None,
    origin: int = 0,
) -> list[Patch]:
    """One patch-generation conversation; returns the parsed edits.

    The conversation is fresh: it carries the summary, not the debug-phase
    messages. The model may read source context through the static tools.
    Raises PatchFormatError when no valid edits arrive within budget.
    """
    params = params if params is not None else GenerationParams()
    executor = ToolExecutor(project)
    messages = build_patch_prompt(summary, executor.index, feedback)

    def push(message: ChatMessage):
        messages.append(message)
        if transcript is not None:
            transcript.add_message(message)

    # seed messages were built directly; mirror them into the transcript
    if transcript is not None:
        for message in messages:
            transcript.add_message(message)

    reprompted = False
    for _ in range(MAX_GENERATION_TURNS):
        reply = llm.complete(messages, PATCH_TOOL_SCHEMAS, params)
        push(reply)
        if "```edit" in reply.content:
            try:
                patches = parse_edit_blocks(reply.content, origin=origin)
            except PatchFormatError as exc:
                if reprompted:
                    raise
                reprompted = True
                push(
                    ChatMessage(
                        role="user",
                        content=f"Those edit blocks were malformed ({exc}). "
                        "Re-emit the fix in this format:\n" + EDIT_FORMAT_HELP,
                    )
                )
                continue
            _attach_expected(patches, Path(project.root))
            return patches
        if reply.tool_calls:
            for call in reply.tool_calls:
                push(
                    ChatMessage(
                        role="tool",
                        content=_static_dispatch(executor, call),
                        tool_call_id=call.id,
                    )
                )
            continue
        if reprompted:
            raise PatchFormatError("still no edit blocks after the re-prompt")
        reprompted = True
        push(
            ChatMessage(
                role="user",
                content="Reply with the fix as edit blocks in this format:\n"
                + EDIT_FORMAT_HELP,
            )
        )
    raise PatchFormatError(f"no edit blocks after {MAX_GENERATION_TURNS} turns")


def _static_dispatch(executor: ToolExecutor, call) -> str:
    args = call.arguments
    try:
        match call.name:
            case "get_file_content":
                return executor.get_file_content(
                    str(args["path"]), int(args["start_line"]), int(args["end_line"])
                )
            case "definition":
                return executor.definition(str(args["symbol"]))
            case "summary":
                return executor.summary(str(args["symbol"]))
            case "function_body":
                return executor.function_body(str(args["name"]))
            case _:
                return f"error: tool '{call.name}' is not available in the patch phase"
    except (KeyError, TypeError, ValueError) as exc:
        return f"error: bad arguments: {exc}"


def _attach_expected(patches: list[Patch], root: Path):
    # snapshot the lines each replacement covers so application can detect
    # that the tree moved underneath the patch
    for patch in patches:
        if patch.insertion:
            continue
        target = root / patch.file
        if not target.is_file():
            continue  # application will reject it with a clear error
        lines = target.read_text().split("\n")
        if patch.end_line <= len(lines):
            patch.expected = lines[patch.start_line - 1 : patch.end_line]


# -- the full retry cycle ----------------------------------------------------------------


def attempt_patches(
    project: ProjectSpec,
    patches: list[Patch],
    debugger: str = "gdb",
    debugger_flags: Optional[list[str]] = None,
    scratch_dir=None,
) -> tuple[ValidationResult, Optional[PatchedTree]]:
    """Precheck, apply, build, and re-run one candidate patch set."""
    by_file: dict[str, list[Patch]] = {}
    for patch in patches:
        by_file.setdefault(patch.file, []).append(patch)
    root = Path(project.root)
    for file, file_patches in by_file.items():
        target = root / file
        if not target.is_file():
            return SyntaxRejected(f"patched file does not exist: {file}"), None
        rejected = precheck_syntax(target.read_text(), file_patches)
        if rejected is not None:
            return rejected, None
    try:
        tree = apply_patch(project.root, patches, scratch_dir=scratch_dir)
    except ApplyConflict as exc:
        return SyntaxRejected(str(exc)), None
    return validate(project, tree, debugger=debugger, debugger_flags=debugger_flags), tree


def repair_cycle(
    project: ProjectSpec,
    crash: CrashReport,
    cfc,
    llm,
    policy: Optional[RetryPolicy] = None,
    caps: Optional[Caps] = None,
    params: Optional[GenerationParams] = None,
    debugger: str = "gdb",
    debugger_flags: Optional[list[str]] = None,
    transcript: Optional[AgentTranscript] = None,
    scratch_root=None,
) -> RepairOutcome:
    """Debug, patch, validate; re-debug on exhaustion up to the phase cap.

    The first patch whose rebuilt program survives the proof of concept wins.
    """
    policy = policy if policy is not None else RetryPolicy()
    transcript = transcript if transcript is not None else AgentTranscript()
    attempts: list[Attempt] = []
    summaries: list[RepairSummary] = []
    scratch_base = Path(scratch_root) if scratch_root else None
    for phase in range(1, policy.max_debug_phases + 1):
        transcript.add_event("debug-phase", phase=phase)
        summary, _ = run_debug_phase(
            project,
            crash,
            cfc,
            llm,
            caps=caps,
            params=params,
            debugger=debugger,
            debugger_flags=debugger_flags,
            transcript=transcript,
        )
        if summary.incomplete and summary.records:
            # the phase hit a cap; one extra turn can still distill the rounds
            salvaged = summarize(
                summary.records, llm, project=project, params=params, transcript=transcript
            )
            if not salvaged.incomplete:
                summary = salvaged
        summaries.append(summary)
        if summary.incomplete or not summary.fix_locations:
            transcript.add_event("phase-skip", phase=phase, reason=summary.reason)
            continue
        feedback: Optional[ValidationResult] = None
        for attempt_no in range(1, policy.max_attempts_per_phase + 1):
            transcript.add_event("patch-attempt", phase=phase, attempt=attempt_no)
            scratch = (
                str(scratch_base / f"phase{phase}-attempt{attempt_no}")
                if scratch_base
                else None
            )
            try:
                patches = generate_patch(
                    summary,
                    llm,
                    project,
                    feedback=feedback,
                    params=params,
                    transcript=transcript,
                    origin=attempt_no,
                )
            except PatchFormatError as exc:
                result: ValidationResult = SyntaxRejected(f"malformed edit format: {exc}")
                attempts.append(Attempt(phase, attempt_no, [], result))
                feedback = result
                continue
            result, tree = attempt_patches(
                project,
                patches,
                debugger=debugger,
                debugger_flags=debugger_flags,
                scratch_dir=scratch,
            )
            attempts.append(Attempt(phase, attempt_no, patches, result))
            if isinstance(result, Fixed):
                assert tree is not None
                return RepairOutcome(
                    status="fixed",
                    attempts=attempts,
                    accepted=patches,
                    debug_phases=phase,
                    patched_root=str(tree.root),
                    summaries=summaries,
                )
            feedback = result
    return RepairOutcome(
        status="exhausted",
        attempts=attempts,
        debug_phases=policy.max_debug_phases,
        summaries=summaries,
    )


# -- artifacts ------------------------------------------------------------------------


def patch_to_json(patch: Patch) -> dict:
    return {
        "file": patch.file,
        "start_line": patch.start_line,
        "end_line": patch.end_line,
        "replacement": patch.replacement,
        "insertion": patch.insertion,
        "origin": patch.origin,
    }


def patches_from_json(data) -> list[Patch]:
    """Decode a stored patch: a single edit object or a list of them.

    Raises PatchFormatError on any shape problem, mirroring parse failures
    of model-emitted edit blocks.
    """
    entries = data if isinstance(data, list) else [data]
    if not entries:
        raise PatchFormatError("the patch file contains no edits")
    patches = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise PatchFormatError(f"edit {i + 1} is not an object")
        known = {"file", "start_line", "end_line", "replacement", "insertion"}
        extras = set(entry) - known
        if extras:
            raise PatchFormatError(f"edit {i + 1} has unknown key(s): {', '.join(sorted(extras))}")
        try:
            file = entry["file"]
            start_line = entry["start_line"]
        except KeyError as exc:
            raise PatchFormatError(f"edit {i + 1} is missing {exc.args[0]}") from exc
        end_line = entry.get("end_line", start_line)
        replacement = entry.get("replacement", "")
        insertion = entry.get("insertion", False)
        if (
            not isinstance(file, str)
            or not isinstance(start_line, int)
            or not isinstance(end_line, int)
            or not isinstance(replacement, str)
            or not isinstance(insertion, bool)
        ):
            raise PatchFormatError(f"edit {i + 1} has a wrongly typed field")
        try:
            patches.append(
                Patch(
                    file=file,
                    start_line=start_line,
                    end_line=end_line,
                    replacement=replacement,
                    insertion=insertion,
                )
            )
        except ValueError as exc:
            raise PatchFormatError(f"edit {i + 1}: {exc}") from exc
    return patches


def attempts_to_json(attempts: list[Attempt]) -> list[dict]:
    return [
        {
            "phase": a.phase,
            "attempt": a.attempt,
            "patches": [patch_to_json(p) for p in a.patches],
            "result": validation_to_json(a.result),
        }
        for a in attempts
    ]


def outcome_to_json(outcome: RepairOutcome) -> dict:
    return {
        "status": outcome.status,
        "debug_phases": outcome.debug_phases,
        "attempts": attempts_to_json(outcome.attempts),
        "accepted": [patch_to_json(p) for p in outcome.accepted],
    }


def render_unified_diff(original_root, patched_root, files: list[str]) -> str:
    """Unified diff of the touched files between the two trees."""
    chunks = []
    for file in sorted(set(files)):
        before = (Path(original_root) / file).read_text().splitlines(keepends=True)
        after = (Path(patched_root) / file).read_text().splitlines(keepends=True)
        chunks.extend(
            difflib.unified_diff(before, after, fromfile=f"a/{file}", tofile=f"b/{file}")
        )
    return "".join(chunks)


def write_patch_artifacts(out_dir, outcome: RepairOutcome, project_root):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "attempts.json").write_text(
        json.dumps(outcome_to_json(outcome), indent=2) + "\n"
    )
    diff_text = ""
    if outcome.status == "fixed" and outcome.patched_root:
        touched = [p.file for p in outcome.accepted]
        diff_text = render_unified_diff(project_root, outcome.patched_root, touched)
    (out / "patch.diff").write_text(diff_text)
