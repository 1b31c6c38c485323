"""Run the proof-of-concept, classify the crash, and seed the constraint.

The derived constraint document feeds the agent's initial prompt. An
external constraint file is authoritative when present; otherwise a
template is instantiated from the crash class, with slot operands
recovered lexically from the single crash line. Misrecovered operands
are tolerable: the rendered sentence is advisory context, not ground
truth.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Optional

from .cfc import (
    CfcDocument,
    ConditionParseError,
    NlRenderError,
    TemplateClass,
    instantiate_template,
    load_cfc_text,
    document_to_json,
)
from .debugger import DebugSession, EarlierCrash
from .location import SourceLocation
from .project import ProjectSpec
from .report import CrashClass, CrashReport, NoCrash, UNKNOWN_FILE, report_to_json


class NoCfcError(Exception):
    """No constraint can be derived; the pipeline degrades to crash info only."""


def run_poc(
    project: ProjectSpec,
    debugger: str = "gdb",
    scratch_dir: Optional[str] = None,
    debugger_flags: Optional[list[str]] = None,
) -> CrashReport:
    """Execute run_cmd with the POC under the debugger and report the crash."""
    session = DebugSession(
        project, debugger=debugger, extra_flags=debugger_flags, scratch_dir=scratch_dir
    )
    try:
        outcome = session.run_to_completion()
    finally:
        session.kill()
    if isinstance(outcome, EarlierCrash):
        report = outcome.report
        _prefer_project_location(report)
        return report
    return CrashReport(kind=NoCrash())


def _is_project_file(file: str) -> bool:
    return (
        file != UNKNOWN_FILE
        and not Path(file).is_absolute()
        and not file.startswith("..")
    )


def _prefer_project_location(report: CrashReport):
    """Anchor the report at the innermost frame inside the project tree."""
    if report.location is not None and _is_project_file(report.location.file):
        return
    for frame in report.backtrace:
        if _is_project_file(frame.file) and frame.line > 0:
            report.location = SourceLocation(frame.file, frame.line)
            return


# -- constraint derivation ----------------------------------------------------

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"

_ASSERT_COND = re.compile(r"Assertion\s+`(?P<cond>.*)'\s+failed")
_INDEXED = re.compile(rf"(?P<base>{_IDENT})\s*\[")
_DEREF = re.compile(rf"\*\s*\(?\s*(?P<ptr>{_IDENT})")
_ARITH = re.compile(rf"(?P<a>{_IDENT})\s*(?P<op>[+\-*])\s*(?P<b>{_IDENT}|[0-9]+)")
_MEM_CALL = re.compile(rf"mem(?:cpy|move)\s*\(\s*(?P<args>[^;]*)\)")
_TYPE_IN_MESSAGE = re.compile(r"type\s+'(?P<type>[^']+)'")

_INT_RANGES = {
    "char": (-128, 127),
    "signed char": (-128, 127),
    "unsigned char": (0, 255),
    "short": (-32768, 32767),
    "unsigned short": (0, 65535),
    "int": (-2147483648, 2147483647),
    "unsigned int": (0, 4294967295),
    "long": (-9223372036854775808, 9223372036854775807),
    "unsigned long": (0, 18446744073709551615),
    "long long": (-9223372036854775808, 9223372036854775807),
    "unsigned long long": (0, 18446744073709551615),
}


def derive_cfc(
    report: CrashReport,
    root: Optional[str] = None,
    external_path: Optional[str] = None,
) -> CfcDocument:
    """Build the constraint document for a crash.

    An external constraint file is parsed, simplified, and rendered,
    and overrides template derivation entirely.
    """
    if external_path is not None:
        text = Path(external_path).read_text()
        return load_cfc_text(text)
    if not report.crashed:
        raise ValueError("cannot derive a constraint without a crash")

    crash_line = _crash_line_text(report, root)
    klass = report.crash_class
    try:
        if klass is CrashClass.DivByZero:
            return instantiate_template(
                TemplateClass.T6_DivByZero, {"divisor": _recover_divisor(crash_line)}
            )
        if klass is CrashClass.NullDeref:
            return instantiate_template(
                TemplateClass.T5_NullPointer, {"pointer": _recover_deref(crash_line)}
            )
        if klass is CrashClass.OobAccess:
            return instantiate_template(
                TemplateClass.T2_PointerBounds, {"pointer": _recover_indexed(crash_line)}
            )
        if klass is CrashClass.ArithOverflow:
            return instantiate_template(
                TemplateClass.T3_ArithRange, _recover_arith(crash_line, report.message)
            )
        if klass is CrashClass.MemOverlap:
            return instantiate_template(
                TemplateClass.T4_MemOverlap, _recover_mem_call(crash_line)
            )
        if klass is CrashClass.AssertFail:
            return instantiate_template(
                TemplateClass.T1_Assert, {"condition": _recover_assert(report.message)}
            )
    except (ConditionParseError, NlRenderError, ValueError, KeyError) as exc:
        raise NoCfcError(f"operand recovery failed: {exc}") from exc
    raise NoCfcError(f"no template for crash class {klass.value if klass else 'unknown'}")


def _crash_line_text(report: CrashReport, root: Optional[str]) -> str:
    if root is None or report.location is None:
        return ""
    path = Path(root) / report.location.file
    try:
        lines = path.read_text(errors="replace").splitlines()
        return lines[report.location.line - 1]
    except (OSError, IndexError):
        return ""


def _recover_divisor(crash_line: str) -> str:
    # rightmost division; the divisor is the first identifier after it
    pos = crash_line.rfind("/")
    if pos < 0:
        raise NoCfcError(f"no division on crash line {crash_line!r}")
    m = re.search(_IDENT, crash_line[pos + 1 :])
    if m is None:
        raise NoCfcError(f"no divisor name on crash line {crash_line!r}")
    return m.group()


def _unary_deref(crash_line: str):
    # a '*' preceded (ignoring spaces) by an operand is multiplication
    for m in _DEREF.finditer(crash_line):
        i = m.start() - 1
        while i >= 0 and crash_line[i].isspace():
            i -= 1
        if i >= 0 and (crash_line[i].isalnum() or crash_line[i] in "_)]"):
            continue
        return m.group("ptr")
    return None


def _recover_deref(crash_line: str) -> str:
    ptr = _unary_deref(crash_line)
    if ptr is None:
        raise NoCfcError(f"no dereference on crash line {crash_line!r}")
    return ptr


def _recover_indexed(crash_line: str) -> str:
    m = _INDEXED.search(crash_line)
    if m is not None:
        return m.group("base")
    ptr = _unary_deref(crash_line)
    if ptr is not None:
        return ptr
    raise NoCfcError(f"no indexed access on crash line {crash_line!r}")


def _recover_arith(crash_line: str, message: str) -> dict:
    m = _ARITH.search(crash_line)
    if m is None:
        raise NoCfcError(f"no arithmetic expression on crash line {crash_line!r}")
    type_match = _TYPE_IN_MESSAGE.search(message)
    type_name = type_match.group("type") if type_match else "int"
    lo, hi = _INT_RANGES.get(type_name, _INT_RANGES["int"])
    return {"a": m.group("a"), "op": m.group("op"), "b": m.group("b"), "min": lo, "max": hi}


def _recover_mem_call(crash_line: str) -> dict:
    m = _MEM_CALL.search(crash_line)
    if m is None:
        raise NoCfcError(f"no memcpy/memmove call on crash line {crash_line!r}")
    args = [a.strip() for a in m.group("args").split(",")]
    if len(args) < 3:
        raise NoCfcError(f"overlap call has too few arguments: {crash_line!r}")
    fields = {}
    for slot, arg in zip(("p", "q", "s"), args):
        token = re.search(rf"{_IDENT}|[0-9]+", arg)
        if token is None:
            raise NoCfcError(f"cannot name operand {arg!r}")
        fields[slot] = token.group()
    return fields


def _recover_assert(message: str) -> str:
    m = _ASSERT_COND.search(message)
    if m is None:
        raise NoCfcError(f"no assertion condition in message {message!r}")
    return m.group("cond")


# -- artifacts -----------------------------------------------------------------


def write_triage_artifacts(
    out_dir: str,
    report: CrashReport,
    doc: Optional[CfcDocument],
    no_cfc_reason: str = "",
):
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / "crash.json").write_text(json.dumps(report_to_json(report), indent=2) + "\n")
    if doc is not None:
        payload = {"available": True, **document_to_json(doc)}
    else:
        payload = {"available": False, "reason": no_cfc_reason}
    (path / "cfc.json").write_text(json.dumps(payload, indent=2) + "\n")
