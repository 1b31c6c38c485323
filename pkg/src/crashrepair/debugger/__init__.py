from .mi import (
    AsyncRecord,
    MiParseError,
    ResultRecord,
    StreamRecord,
    mi_quote,
    parse_mi_line,
)
from .session import (
    Breakpoint,
    BreakpointError,
    BreakpointStop,
    Crashed,
    DebuggerError,
    DebugSession,
    EarlierCrash,
    EvalError,
    EvalResult,
    Exited,
    ExitedCleanly,
    FrameRangeError,
    Killed,
    LaunchError,
    NotStarted,
    NotStoppedError,
    OptimizedOut,
    Running,
    RunTimeoutError,
    RunToLineResult,
    SessionClosedError,
    SessionState,
    SignalStop,
    StepStop,
    Stopped,
    StopInfo,
    StopReason,
    Value,
)

__all__ = [
    "AsyncRecord",
    "MiParseError",
    "ResultRecord",
    "StreamRecord",
    "mi_quote",
    "parse_mi_line",
    "Breakpoint",
    "BreakpointError",
    "BreakpointStop",
    "Crashed",
    "DebuggerError",
    "DebugSession",
    "EarlierCrash",
    "EvalError",
    "EvalResult",
    "Exited",
    "ExitedCleanly",
    "FrameRangeError",
    "Killed",
    "LaunchError",
    "NotStarted",
    "NotStoppedError",
    "OptimizedOut",
    "Running",
    "RunTimeoutError",
    "RunToLineResult",
    "SessionClosedError",
    "SessionState",
    "SignalStop",
    "StepStop",
    "Stopped",
    "StopInfo",
    "StopReason",
    "Value",
]
