"""Crash report types, sanitizer output parsing, and classification.

Classification is a pure function of the signal name, the sanitizer
check name, and a token scan of the crash line's source text, so the
same inputs always produce the same class.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .location import SourceLocation

UNKNOWN_FILE = "<unknown>"


@dataclass(frozen=True)
class Signal:
    name: str


@dataclass(frozen=True)
class Sanitizer:
    check: str


@dataclass(frozen=True)
class Assertion:
    pass


@dataclass(frozen=True)
class NoCrash:
    pass


CrashKind = Union[Signal, Sanitizer, Assertion, NoCrash]


class CrashClass(enum.Enum):
    DivByZero = "div-by-zero"
    NullDeref = "null-deref"
    OobAccess = "oob-access"
    ArithOverflow = "arith-overflow"
    MemOverlap = "mem-overlap"
    AssertFail = "assert-fail"
    Unknown = "unknown"


@dataclass
class StackFrame:
    index: int
    function: str
    file: str = UNKNOWN_FILE
    line: int = 0

    def __str__(self):
        return f"#{self.index} {self.function} at {self.file}:{self.line}"


@dataclass
class CrashReport:
    kind: CrashKind
    crash_class: Optional[CrashClass] = None
    message: str = ""
    location: Optional[SourceLocation] = None
    backtrace: list[StackFrame] = field(default_factory=list)

    def __post_init__(self):
        if isinstance(self.kind, NoCrash):
            if self.backtrace:
                raise ValueError("a NoCrash report cannot carry a backtrace")
            self.crash_class = None

    @property
    def crashed(self) -> bool:
        return not isinstance(self.kind, NoCrash)


def kind_to_json(kind: CrashKind) -> dict:
    match kind:
        case Signal(name):
            return {"kind": "signal", "signal": name}
        case Sanitizer(check):
            return {"kind": "sanitizer", "check": check}
        case Assertion():
            return {"kind": "assertion"}
        case NoCrash():
            return {"kind": "no-crash"}


def report_to_json(report: CrashReport) -> dict:
    out = kind_to_json(report.kind)
    out["crash_class"] = report.crash_class.value if report.crash_class else None
    out["message"] = report.message
    out["location"] = (
        {"file": report.location.file, "line": report.location.line}
        if report.location
        else None
    )
    out["backtrace"] = [
        {"index": f.index, "function": f.function, "file": f.file, "line": f.line}
        for f in report.backtrace
    ]
    return out


# -- sanitizer output parsing -----------------------------------------------

_ASAN_HEADER = re.compile(r"==\d+==\s*ERROR:\s*(\w+)Sanitizer:?\s+(.*)")
_UBSAN_HEADER = re.compile(r"(?P<file>[^\s:]+):(?P<line>\d+):(?:\d+:)?\s+runtime error:\s+(?P<msg>.*)")
_FRAME_LINE = re.compile(r"\s*#(?P<idx>\d+)\s+0x[0-9a-fA-F]+\s+(?:in\s+)?(?P<rest>.*)")
_FILE_LINE = re.compile(r"(?P<file>[^\s:()]+):(?P<line>\d+)(?::\d+)?$")
_ASSERT_LINE = re.compile(
    r"(?P<file>[^\s:]+):(?P<line>\d+):\s+(?P<func>[^:]+):\s+Assertion\s+(?P<cond>.*)\s+failed"
)

_SANITIZER_INTERNAL = ("__interceptor_", "__asan_", "__ubsan_", "__sanitizer_")


def parse_sanitizer_report(text: str) -> CrashReport:
    """Extract a sanitizer or assertion report from raw process output.

    Returns a NoCrash-shaped report when no block is found; the caller
    merges it with signal information from the debugger.
    """
    lines = text.splitlines()

    for i, line in enumerate(lines):
        m = _ASAN_HEADER.search(line)
        if m:
            return _parse_asan_block(m, lines[i:])
        m = _UBSAN_HEADER.match(line.strip())
        if m:
            return _parse_ubsan_block(m, lines[i:])
        m = _ASSERT_LINE.search(line)
        if m:
            return CrashReport(
                kind=Assertion(),
                crash_class=CrashClass.AssertFail,
                message=line.strip(),
                location=SourceLocation(m.group("file"), int(m.group("line"))),
            )
    return CrashReport(kind=NoCrash())


def _parse_asan_block(header_match, lines) -> CrashReport:
    message = lines[0].strip()
    check = _asan_check_name(header_match.group(2))
    frames = _collect_frames(lines)
    return CrashReport(
        kind=Sanitizer(check),
        crash_class=classify_sanitizer_check(check, message),
        message=message,
        location=_innermost_location(frames),
        backtrace=frames,
    )


def _asan_check_name(rest: str) -> str:
    # "heap-buffer-overflow on address 0x..." -> "heap-buffer-overflow"
    # "attempting double-free on ..."         -> "double-free"
    rest = rest.strip()
    if rest.startswith("attempting "):
        rest = rest[len("attempting ") :]
    token = re.split(r"[\s:]", rest, maxsplit=1)[0]
    return token


def _parse_ubsan_block(m, lines) -> CrashReport:
    message = lines[0].strip()
    check = m.group("msg").split(":")[0].strip()
    frames = _collect_frames(lines)
    location = SourceLocation(m.group("file"), int(m.group("line")))
    return CrashReport(
        kind=Sanitizer(check),
        crash_class=classify_sanitizer_check(check, message),
        message=message,
        location=location,
        backtrace=frames,
    )


def _collect_frames(lines) -> list[StackFrame]:
    frames = []
    for line in lines:
        m = _FRAME_LINE.match(line)
        if m is None:
            if frames:
                break  # the frame block ended
            continue
        rest = m.group("rest").strip()
        parts = rest.split(None, 1)
        function = parts[0] if parts else UNKNOWN_FILE
        file, line_no = UNKNOWN_FILE, 0
        if len(parts) > 1:
            fl = _FILE_LINE.search(parts[1].strip())
            if fl:
                file, line_no = fl.group("file"), int(fl.group("line"))
        frames.append(
            StackFrame(index=len(frames), function=function, file=file, line=line_no)
        )
    return frames


def _innermost_location(frames) -> Optional[SourceLocation]:
    for frame in frames:
        if frame.file == UNKNOWN_FILE:
            continue
        if any(frame.function.startswith(p) for p in _SANITIZER_INTERNAL):
            continue
        if "libsanitizer" in frame.file:
            continue
        return SourceLocation(frame.file, frame.line)
    return None


# -- classification ----------------------------------------------------------

_OOB_CHECKS = (
    "heap-buffer-overflow",
    "stack-buffer-overflow",
    "global-buffer-overflow",
    "dynamic-stack-buffer-overflow",
    "heap-use-after-free",
    "stack-use-after-return",
    "stack-use-after-scope",
)


def classify_sanitizer_check(check: str, message: str = "") -> CrashClass:
    check = check.strip()
    lowered = check.lower()
    if check in _OOB_CHECKS or "out of bounds" in lowered:
        return CrashClass.OobAccess
    # an underflowed length handed to a mem* call is a range violation
    if "negative-size" in lowered:
        return CrashClass.OobAccess
    if "division by zero" in lowered or "divide by zero" in lowered:
        return CrashClass.DivByZero
    if "overlap" in lowered:
        return CrashClass.MemOverlap
    if "null pointer" in lowered or "null-pointer" in lowered:
        return CrashClass.NullDeref
    if "overflow" in lowered and any(
        word in lowered for word in ("integer", "shift", "negation", "multiplication")
    ):
        return CrashClass.ArithOverflow
    if lowered == "segv" or lowered.startswith("segv"):
        m = re.search(r"address 0x0*([0-9a-fA-F]+)", message)
        if m is None or int(m.group(1), 16) < 0x1000:
            return CrashClass.NullDeref
        return CrashClass.OobAccess
    return CrashClass.Unknown


def classify_signal(name: str, crash_line_text: str = "") -> CrashClass:
    if name == "SIGFPE":
        return CrashClass.DivByZero
    if name in ("SIGSEGV", "SIGBUS"):
        if "[" in crash_line_text:
            return CrashClass.OobAccess
        return CrashClass.NullDeref
    return CrashClass.Unknown


def classify(kind: CrashKind, crash_line_text: str = "", message: str = "") -> CrashClass:
    """Pure classification from kind plus the crash line's source text."""
    match kind:
        case Assertion():
            return CrashClass.AssertFail
        case Signal(name):
            return classify_signal(name, crash_line_text)
        case Sanitizer(check):
            return classify_sanitizer_check(check, message)
        case _:
            return CrashClass.Unknown
