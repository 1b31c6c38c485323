"""Live debug session over the machine-interface protocol.

One session owns one debugger subprocess and its inferior. The protocol
is synchronous request/response; a background reader collects async
records (stop events) and stream output. Sanitizer runtimes are pointed
at a per-session scratch directory via their environment options, so a
sanitizer abort that ends in a plain exit is still detected from its
report file and surfaces as a crash.
"""

from __future__ import annotations

import itertools
import os
import queue
import shlex
import signal
import subprocess
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from tempfile import mkdtemp
from typing import Optional, Union

from ..location import SourceLocation
from ..project import ProjectSpec
from ..report import (
    CrashReport,
    NoCrash,
    Signal,
    StackFrame,
    UNKNOWN_FILE,
    classify_signal,
    parse_sanitizer_report,
)
from .mi import AsyncRecord, MiParseError, ResultRecord, StreamRecord, mi_quote, parse_mi_line

EVAL_TIMEOUT_S = 5.0


class DebuggerError(Exception):
    pass


class LaunchError(DebuggerError):
    pass


class SessionClosedError(DebuggerError):
    pass


class NotStoppedError(DebuggerError):
    pass


class BreakpointError(DebuggerError):
    pass


class FrameRangeError(DebuggerError):
    pass


class RunTimeoutError(DebuggerError):
    pass


# -- session states ----------------------------------------------------------


@dataclass(frozen=True)
class BreakpointStop:
    number: int


@dataclass(frozen=True)
class SignalStop:
    name: str


@dataclass(frozen=True)
class StepStop:
    pass


StopReason = Union[BreakpointStop, SignalStop, StepStop]


@dataclass(frozen=True)
class NotStarted:
    pass


@dataclass(frozen=True)
class Running:
    pass


@dataclass(frozen=True)
class Stopped:
    at: SourceLocation
    reason: StopReason


@dataclass(frozen=True)
class Exited:
    code: int


@dataclass(frozen=True)
class Crashed:
    report: CrashReport


@dataclass(frozen=True)
class Killed:
    pass


SessionState = Union[NotStarted, Running, Stopped, Exited, Crashed, Killed]


# -- evaluation results -------------------------------------------------------


@dataclass(frozen=True)
class Value:
    text: str
    type_name: str = ""


@dataclass(frozen=True)
class OptimizedOut:
    pass


@dataclass(frozen=True)
class EvalError:
    message: str


EvalResult = Union[Value, OptimizedOut, EvalError]

OPTIMIZED_OUT_TEXT = "<optimized out>"


@dataclass
class StopInfo:
    location: SourceLocation
    locals: dict[str, EvalResult] = field(default_factory=dict)


@dataclass
class EarlierCrash:
    report: CrashReport


@dataclass
class ExitedCleanly:
    code: int


RunToLineResult = Union[StopInfo, EarlierCrash, ExitedCleanly]


@dataclass
class Breakpoint:
    file: str
    line: int
    hit_count: int = 1
    resolved_address: Optional[str] = None
    number: Optional[int] = None

    def __post_init__(self):
        if self.hit_count < 1:
            raise ValueError("hit_count must be >= 1")


# -- MI subprocess client ------------------------------------------------------


class _MiClient:
    def __init__(self, argv: list[str], cwd: str):
        try:
            self.proc = subprocess.Popen(
                argv,
                cwd=cwd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except (OSError, ValueError) as exc:
            raise LaunchError(f"failed to start debugger: {exc}") from exc
        self.results: queue.Queue[ResultRecord] = queue.Queue()
        self.stops: queue.Queue[AsyncRecord] = queue.Queue()
        self.console: list[str] = []
        self.inferior_pid: Optional[int] = None
        self._tokens = itertools.count(1)
        self._write_lock = threading.Lock()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        assert self.proc.stdout is not None
        for line in iter(self.proc.stdout.readline, ""):
            try:
                record = parse_mi_line(line)
            except MiParseError:
                continue
            if record is None:
                continue
            if isinstance(record, ResultRecord):
                self.results.put(record)
            elif isinstance(record, AsyncRecord):
                if record.kind == "exec" and record.klass != "running":
                    self.stops.put(record)
                elif record.kind == "notify" and record.klass == "thread-group-started":
                    try:
                        self.inferior_pid = int(record.results.get("pid", ""))
                    except ValueError:
                        pass
                elif record.kind == "notify" and record.klass == "thread-group-exited":
                    self.inferior_pid = None
            elif isinstance(record, StreamRecord):
                self.console.append(record.text)

    def request(self, command: str, timeout: float) -> ResultRecord:
        if self.proc.poll() is not None:
            raise SessionClosedError("debugger process has exited")
        token = str(next(self._tokens))
        with self._write_lock:
            assert self.proc.stdin is not None
            self.proc.stdin.write(f"{token}{command}\n")
            self.proc.stdin.flush()
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise RunTimeoutError(f"no reply to {command!r} within {timeout}s")
            try:
                record = self.results.get(timeout=remaining)
            except queue.Empty:
                continue
            if record.token == token:
                return record
            # stale reply from an interrupted command; drop it

    def wait_stop(self, timeout: float) -> AsyncRecord:
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise RunTimeoutError(f"program did not stop within {timeout}s")
            try:
                return self.stops.get(timeout=min(remaining, 0.25))
            except queue.Empty:
                if self.proc.poll() is not None:
                    raise SessionClosedError("debugger process has exited")

    def close(self):
        if self.proc.poll() is None:
            try:
                with self._write_lock:
                    if self.proc.stdin is not None:
                        self.proc.stdin.write("-gdb-exit\n")
                        self.proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            try:
                self.proc.wait(timeout=3)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait(timeout=5)
        self._reader.join(timeout=2)


# -- the session ---------------------------------------------------------------


_session_ids = itertools.count(1)


class DebugSession:
    """State machine over one debugger process and its inferior."""

    def __init__(
        self,
        project: ProjectSpec,
        poc: Optional[str] = None,
        debugger: str = "gdb",
        extra_flags: Optional[list[str]] = None,
        scratch_dir: Optional[str] = None,
    ):
        self.id = next(_session_ids)
        self.project = project
        self.root = Path(project.root).resolve()
        self.poc = poc if poc is not None else project.poc
        self.state: SessionState = NotStarted()
        self.current_frame = 0
        self.scratch = Path(scratch_dir) if scratch_dir else Path(mkdtemp(prefix="dbg-"))
        self.scratch.mkdir(parents=True, exist_ok=True)
        self._stderr_path = self.scratch / "stderr.txt"

        binary = self._binary_path()
        if not binary.is_file():
            raise LaunchError(f"binary not found: {binary}")

        argv = [debugger, "--interpreter=mi3", "--quiet", "--nx"]
        argv.extend(extra_flags or [])
        argv.append(str(binary))
        self._mi = _MiClient(argv, cwd=str(self.root))
        try:
            self._configure()
        except DebuggerError:
            self._mi.close()
            raise

    # -- setup -----------------------------------------------------------

    def _binary_path(self) -> Path:
        spec = self.project
        argv = shlex.split(spec.run_cmd.replace("{poc}", self.poc or ""))
        if not argv:
            raise LaunchError("run_cmd is empty")
        return (self.root / argv[0]).resolve()

    def _inferior_args(self) -> list[str]:
        spec = self.project
        argv = shlex.split(spec.run_cmd.replace("{poc}", self.poc or ""))
        return argv[1:]

    def _sanitizer_env(self) -> dict[str, str]:
        merged = {}
        asan = [f"log_path={self.scratch}/asan", "detect_leaks=0", "abort_on_error=0"]
        ubsan = [f"log_path={self.scratch}/ubsan", "print_stacktrace=1"]
        user = dict(self.project.env)
        if "ASAN_OPTIONS" in user:
            asan.append(user.pop("ASAN_OPTIONS"))
        if "UBSAN_OPTIONS" in user:
            ubsan.append(user.pop("UBSAN_OPTIONS"))
        merged["ASAN_OPTIONS"] = ":".join(asan)
        merged["UBSAN_OPTIONS"] = ":".join(ubsan)
        merged.update(user)
        return merged

    def _configure(self):
        first = self._mi.request("-gdb-set confirm off", timeout=10)
        if first.klass == "error":
            raise LaunchError(f"protocol handshake failed: {first.results.get('msg')}")
        for key, value in self._sanitizer_env().items():
            self._request(f"-gdb-set environment {key}={value}", timeout=10)
        args = [shlex.quote(a) for a in self._inferior_args()]
        args.append(f"2>{shlex.quote(str(self._stderr_path))}")
        self._request(f"-exec-arguments {' '.join(args)}", timeout=10)

    def _request(self, command: str, timeout: float = EVAL_TIMEOUT_S) -> ResultRecord:
        self._ensure_open()
        record = self._mi.request(command, timeout)
        return record

    def _ensure_open(self):
        if isinstance(self.state, Killed):
            raise SessionClosedError("session was killed")

    # -- operations ------------------------------------------------------

    def run_to_line(self, file: str, line: int, hit_count: int = 1) -> RunToLineResult:
        self._ensure_open()
        if not isinstance(self.state, (NotStarted, Stopped)):
            raise NotStoppedError(f"cannot run from state {type(self.state).__name__}")
        bp = self._insert_breakpoint(file, line, hit_count)
        try:
            return self._run_until_stop(expected_bkpt=bp)
        finally:
            if bp.number is not None and isinstance(self.state, (Stopped, NotStarted)):
                try:
                    self._request(f"-break-delete {bp.number}")
                except DebuggerError:
                    pass

    def run_to_completion(self) -> RunToLineResult:
        """Run the full program with no breakpoint; used for crash triage."""
        self._ensure_open()
        if not isinstance(self.state, (NotStarted, Stopped)):
            raise NotStoppedError(f"cannot run from state {type(self.state).__name__}")
        return self._run_until_stop(expected_bkpt=None)

    def _insert_breakpoint(self, file: str, line: int, hit_count: int) -> Breakpoint:
        bp = Breakpoint(file=file, line=line, hit_count=hit_count)
        target = (self.root / file).resolve()
        ignore = f"-i {hit_count - 1} " if hit_count > 1 else ""
        record = self._request(f"-break-insert {ignore}{target}:{line}", timeout=10)
        if record.klass == "error":
            raise BreakpointError(
                f"cannot set breakpoint at {file}:{line}: {record.results.get('msg')}"
            )
        info = record.results.get("bkpt", {})
        number = int(info.get("number", 0) or 0)
        bp.number = number
        addr = info.get("addr", "")
        resolved_file = info.get("fullname") or info.get("file") or ""
        ok = addr not in ("<MULTIPLE>", "<PENDING>", "")
        if ok and resolved_file:
            try:
                ok = Path(resolved_file).resolve() == target
            except OSError:
                ok = False
        if not ok:
            self._request(f"-break-delete {number}")
            raise BreakpointError(
                f"breakpoint at {file}:{line} did not resolve inside the project"
                f" (addr={addr!r}, file={resolved_file!r})"
            )
        bp.resolved_address = addr
        return bp

    def _run_until_stop(self, expected_bkpt: Optional[Breakpoint]) -> RunToLineResult:
        command = "-exec-run" if isinstance(self.state, NotStarted) else "-exec-continue"
        record = self._request(command, timeout=10)
        if record.klass == "error":
            raise DebuggerError(f"{command} failed: {record.results.get('msg')}")
        self.state = Running()
        self.current_frame = 0

        try:
            stop = self._mi.wait_stop(timeout=self.project.run_timeout_s)
        except RunTimeoutError:
            self.kill()
            raise
        except SessionClosedError:
            self.state = Killed()
            raise

        klass = stop.klass
        results = stop.results
        if klass == "stopped":
            reason = results.get("reason", "")
            if reason in ("exited", "exited-normally"):
                return self._handle_exit(results)
            if reason == "exited-signalled":
                return self._handle_fatal_signal(results)
            if reason == "signal-received":
                return self._handle_signal_stop(results)
            if reason == "breakpoint-hit":
                return self._handle_breakpoint_stop(results)
            # watchpoints, steps and other stops are not expected here
            return self._handle_breakpoint_stop(results)
        raise DebuggerError(f"unexpected async record {klass!r}")

    # -- stop handling -----------------------------------------------------

    def _handle_exit(self, results: dict) -> RunToLineResult:
        code = int(results.get("exit-code", "0"), 8)
        report = self._sanitizer_report()
        if report.crashed:
            self.state = Crashed(report)
            return EarlierCrash(report)
        self.state = Exited(code)
        return ExitedCleanly(code)

    def _handle_fatal_signal(self, results: dict) -> RunToLineResult:
        report = self._sanitizer_report()
        if not report.crashed:
            name = results.get("signal-name", "UNKNOWN")
            report = CrashReport(
                kind=Signal(name),
                crash_class=classify_signal(name),
                message=results.get("signal-meaning", name),
            )
        self.state = Crashed(report)
        return EarlierCrash(report)

    def _handle_signal_stop(self, results: dict) -> RunToLineResult:
        name = results.get("signal-name", "UNKNOWN")
        frame = results.get("frame", {})
        location = self._frame_location(frame)
        backtrace = self._collect_backtrace()
        report = self._sanitizer_report()
        if not report.crashed:
            crash_line = self._source_line(location)
            report = CrashReport(
                kind=Signal(name),
                crash_class=classify_signal(name, crash_line),
                message=f"{name}: {results.get('signal-meaning', '')}".strip(": "),
                location=location,
                backtrace=backtrace,
            )
        else:
            report.backtrace = report.backtrace or backtrace
            report.location = report.location or location
        self._relativize_report(report)
        self.state = Crashed(report)
        return EarlierCrash(report)

    def _handle_breakpoint_stop(self, results: dict) -> StopInfo:
        frame = results.get("frame", {})
        location = self._frame_location(frame)
        number = int(results.get("bkptno", 0) or 0)
        self.state = Stopped(at=location, reason=BreakpointStop(number))
        self.current_frame = 0
        return StopInfo(location=location, locals=self._frame_locals())

    def _frame_location(self, frame: dict) -> SourceLocation:
        file = frame.get("fullname") or frame.get("file") or UNKNOWN_FILE
        line = int(frame.get("line", 0) or 0)
        return SourceLocation(self._relative(file), line)

    def _relative(self, file: str) -> str:
        if file == UNKNOWN_FILE or not Path(file).is_absolute():
            return file
        try:
            resolved = Path(file).resolve()
            return str(resolved.relative_to(self.root))
        except (ValueError, OSError):
            return file

    def _source_line(self, location: SourceLocation) -> str:
        try:
            path = (self.root / location.file).resolve()
            return path.read_text(errors="replace").split("\n")[location.line - 1]
        except (OSError, IndexError):
            return ""

    def _collect_backtrace(self) -> list[StackFrame]:
        record = self._request("-stack-list-frames", timeout=10)
        if record.klass == "error":
            return []
        frames = []
        for raw in record.results.get("stack", []):
            if not isinstance(raw, dict):
                continue
            file = raw.get("fullname") or raw.get("file") or UNKNOWN_FILE
            frames.append(
                StackFrame(
                    index=int(raw.get("level", len(frames))),
                    function=raw.get("func", "??"),
                    file=self._relative(file),
                    line=int(raw.get("line", 0) or 0),
                )
            )
        return frames

    def _sanitizer_report(self) -> CrashReport:
        chunks = []
        for pattern in ("asan.*", "ubsan.*"):
            for path in sorted(self.scratch.glob(pattern)):
                chunks.append(path.read_text(errors="replace"))
        if self._stderr_path.exists():
            chunks.append(self._stderr_path.read_text(errors="replace"))
        report = parse_sanitizer_report("\n".join(chunks))
        if report.crashed:
            self._relativize_report(report)
        return report

    def _relativize_report(self, report: CrashReport):
        for frame in report.backtrace:
            frame.file = self._relative(frame.file)
        if report.location is not None:
            report.location = SourceLocation(
                self._relative(report.location.file), report.location.line
            )

    def _frame_locals(self) -> dict[str, EvalResult]:
        record = self._request("-stack-list-variables --simple-values", timeout=10)
        if record.klass == "error":
            return {}
        out: dict[str, EvalResult] = {}
        for raw in record.results.get("variables", []):
            if not isinstance(raw, dict) or "name" not in raw:
                continue
            name = raw["name"]
            type_name = raw.get("type", "")
            if "value" not in raw:
                out[name] = Value(text=f"<{type_name}>", type_name=type_name)
            elif raw["value"] == OPTIMIZED_OUT_TEXT:
                out[name] = OptimizedOut()
            else:
                out[name] = Value(text=raw["value"], type_name=type_name)
        return out

    # -- inspection --------------------------------------------------------

    def print_value(self, expr: str) -> EvalResult:
        if not isinstance(self.state, Stopped):
            if isinstance(self.state, Killed):
                raise SessionClosedError("session was killed")
            return EvalError(f"program is not stopped (state {type(self.state).__name__})")
        try:
            record = self._request(
                f"-data-evaluate-expression {mi_quote(expr)}", timeout=EVAL_TIMEOUT_S
            )
        except RunTimeoutError:
            self.kill()
            return EvalError(f"evaluation timed out after {EVAL_TIMEOUT_S:.0f}s")
        if record.klass == "error":
            return EvalError(str(record.results.get("msg", "evaluation failed")))
        text = str(record.results.get("value", ""))
        if text == OPTIMIZED_OUT_TEXT:
            return OptimizedOut()
        return Value(text=text, type_name=self._type_of(expr))

    def _type_of(self, expr: str) -> str:
        try:
            record = self._request(f"-var-create - * {mi_quote(expr)}", timeout=EVAL_TIMEOUT_S)
        except DebuggerError:
            return ""
        if record.klass == "error":
            return ""
        name = record.results.get("name")
        type_name = str(record.results.get("type", ""))
        if name:
            try:
                self._request(f"-var-delete {name}")
            except DebuggerError:
                pass
        return type_name

    def backtrace(self) -> list[StackFrame]:
        self._ensure_open()
        if not isinstance(self.state, Stopped):
            raise NotStoppedError("backtrace requires a stopped program")
        return self._collect_backtrace()

    def select_frame(self, index: int):
        self._ensure_open()
        if not isinstance(self.state, Stopped):
            raise NotStoppedError("select_frame requires a stopped program")
        frames = self._collect_backtrace()
        if index < 0 or index >= len(frames):
            raise FrameRangeError(f"frame {index} out of range (stack depth {len(frames)})")
        record = self._request(f"-stack-select-frame {index}")
        if record.klass == "error":
            raise FrameRangeError(str(record.results.get("msg")))
        self.current_frame = index

    def crash_report(self) -> Optional[CrashReport]:
        return self.state.report if isinstance(self.state, Crashed) else None

    def kill(self):
        if isinstance(self.state, Killed):
            return
        if isinstance(self.state, Running):
            # gdb only reads commands at the prompt; a running inferior
            # must die first or -gdb-exit would never be processed
            pid = self._mi.inferior_pid
            if pid is not None:
                try:
                    os.kill(pid, signal.SIGKILL)
                except (ProcessLookupError, PermissionError):
                    pass
        self.state = Killed()
        self._mi.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.kill()
