"""Command line front end: triage, constraint translation, repair, validation."""

from __future__ import annotations

import argparse
import json
import shutil
import sys
import time
from pathlib import Path
from typing import Optional

from .cfc import (
    CfcDocument,
    CfcParseError,
    ConditionParseError,
    NlRenderError,
    SortError,
    load_cfc_text,
    print_cfc,
)
from .config import ConfigError, JobConfig, load_config
from .debugger import DebuggerError, RunTimeoutError
from .gateway import GatewayError, GenerationParams, RemoteBackend, ScriptedBackend
from .orchestrator import AgentTranscript, Caps, render_constraint, summary_to_json
from .patching import (
    Fixed,
    PatchFormatError,
    RetryPolicy,
    attempt_patches,
    patches_from_json,
    render_validation,
    repair_cycle,
    write_patch_artifacts,
)
from .project import build_project
from .report import CrashReport
from .triage import NoCfcError, derive_cfc, run_poc, write_triage_artifacts

EXIT_FIXED = 0
EXIT_UNFIXED = 1
EXIT_CONFIG = 2
EXIT_ENVIRONMENT = 3


class _Fail(Exception):
    """Aborts a command with a message and a specific exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def allocate_run_dir(output_dir: str, command: str) -> Path:
    """Claim a fresh timestamped directory; reruns never overwrite."""
    base = Path(output_dir)
    base.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    candidate = base / f"{stamp}-{command}"
    n = 1
    while True:
        try:
            candidate.mkdir()
            return candidate
        except FileExistsError:
            n += 1
            candidate = base / f"{stamp}-{command}-{n}"


def _ensure_environment(config: JobConfig):
    if shutil.which(config.debugger.executable) is None:
        raise _Fail(
            EXIT_ENVIRONMENT, f"debugger not found: {config.debugger.executable}"
        )
    if not Path(config.project.root).is_dir():
        raise _Fail(EXIT_ENVIRONMENT, f"project root not found: {config.project.root}")


def _build_baseline(config: JobConfig):
    build = build_project(config.project)
    if build.timed_out:
        raise _Fail(EXIT_ENVIRONMENT, "the project build timed out")
    if not build.ok:
        tail = build.log[-2000:]
        raise _Fail(EXIT_ENVIRONMENT, f"the project does not build:\n{tail}")


def _make_backend(config: JobConfig, scripted_path: Optional[str]):
    if scripted_path:
        try:
            return ScriptedBackend.from_file(scripted_path)
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot load script file {scripted_path}: {exc}") from exc
    if config.llm.backend == "scripted":
        raise ConfigError("llm.backend is 'scripted'; pass --scripted FILE with the turns")
    return RemoteBackend(config.llm.base_url)


def _triage(config: JobConfig) -> CrashReport:
    try:
        return run_poc(
            config.project,
            debugger=config.debugger.executable,
            debugger_flags=list(config.debugger.extra_flags),
        )
    except RunTimeoutError as exc:
        raise _Fail(EXIT_UNFIXED, f"the proof of concept timed out: {exc}") from exc
    except DebuggerError as exc:
        raise _Fail(EXIT_ENVIRONMENT, f"cannot run the proof of concept: {exc}") from exc


def _resolve_cfc(
    config: JobConfig, report: CrashReport, no_cfc: bool
) -> tuple[Optional[CfcDocument], str]:
    """Pick the constraint source: ablation switch, explicit file, or derivation."""
    if no_cfc:
        return None, "disabled by --no-cfc"
    if not report.crashed:
        return None, "the proof of concept did not crash"
    if config.cfc_file:
        try:
            text = Path(config.cfc_file).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read cfc_file: {exc}") from exc
        try:
            return load_cfc_text(text), ""
        except (CfcParseError, ConditionParseError, SortError, NlRenderError) as exc:
            raise ConfigError(f"cfc_file is not a valid constraint: {exc}") from exc
    try:
        return derive_cfc(report, root=config.project.root), ""
    except NoCfcError as exc:
        return None, str(exc)


def _describe_crash(report: CrashReport) -> str:
    if not report.crashed:
        return "no crash: the program exited cleanly"
    label = report.crash_class.value if report.crash_class else "crash"
    where = f" at {report.location}" if report.location else ""
    return f"crash: {label}{where}"


def cmd_repair(args) -> int:
    config = load_config(args.config)
    backend = _make_backend(config, args.scripted)
    _ensure_environment(config)
    _build_baseline(config)
    run_dir = allocate_run_dir(config.output_dir, "repair")
    print(f"artifacts: {run_dir}")

    report = _triage(config)
    cfc, no_cfc_reason = _resolve_cfc(config, report, args.no_cfc)
    write_triage_artifacts(str(run_dir), report, cfc, no_cfc_reason)
    print(_describe_crash(report))
    if not report.crashed:
        print("nothing to repair")
        return EXIT_UNFIXED
    if cfc is not None:
        print(f"constraint: {render_constraint(cfc)}")
    else:
        print(f"constraint: unavailable ({no_cfc_reason})")
    if args.dry_run:
        print("dry run: stopping before the repair loop")
        return EXIT_FIXED

    transcript = AgentTranscript()
    caps = Caps(max_rounds=config.caps.max_debug_rounds)
    policy = RetryPolicy(
        max_attempts_per_phase=config.caps.max_patch_attempts,
        max_debug_phases=config.caps.max_debug_phases,
    )
    params = GenerationParams(
        model=config.llm.model, temperature=config.llm.temperature
    )
    try:
        outcome = repair_cycle(
            config.project,
            report,
            cfc,
            backend,
            policy=policy,
            caps=caps,
            params=params,
            debugger=config.debugger.executable,
            debugger_flags=list(config.debugger.extra_flags),
            transcript=transcript,
            scratch_root=str(run_dir / "trees"),
        )
    finally:
        transcript.save(str(run_dir / "transcript.jsonl"))

    summary = outcome.final_summary
    if summary is not None:
        summary_payload = summary_to_json(summary)
    else:
        summary_payload = {"available": False, "reason": "no debug summary was produced"}
    (run_dir / "summary.json").write_text(json.dumps(summary_payload, indent=2) + "\n")
    write_patch_artifacts(run_dir, outcome, config.project.root)

    if outcome.status == "fixed":
        last = outcome.attempts[-1]
        print(f"fixed: patch accepted on attempt {last.attempt} of phase {last.phase}")
        print(f"patched tree: {outcome.patched_root}")
        return EXIT_FIXED
    print(f"exhausted: {len(outcome.attempts)} patch attempts failed")
    return EXIT_UNFIXED


def cmd_triage(args) -> int:
    config = load_config(args.config)
    _ensure_environment(config)
    _build_baseline(config)
    run_dir = allocate_run_dir(config.output_dir, "triage")
    print(f"artifacts: {run_dir}")

    report = _triage(config)
    cfc, no_cfc_reason = _resolve_cfc(config, report, no_cfc=False)
    write_triage_artifacts(str(run_dir), report, cfc, no_cfc_reason)
    print(_describe_crash(report))
    if cfc is not None:
        print(f"constraint: {render_constraint(cfc)}")
    elif report.crashed:
        print(f"constraint: unavailable ({no_cfc_reason})")
    return EXIT_FIXED if report.crashed else EXIT_UNFIXED


def cmd_cfc_translate(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read constraint file: {exc}") from exc
    try:
        doc = load_cfc_text(text)
    except (CfcParseError, ConditionParseError, SortError, NlRenderError) as exc:
        raise ConfigError(f"not a valid constraint: {exc}") from exc
    print(print_cfc(doc.expr))
    print(doc.nl_text)
    return EXIT_FIXED


def cmd_validate(args) -> int:
    config = load_config(args.config)
    try:
        data = json.loads(Path(args.patch).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read patch file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"patch file is not valid JSON: {exc}") from exc
    patches = patches_from_json(data)
    _ensure_environment(config)
    _build_baseline(config)
    result, _ = attempt_patches(
        config.project,
        patches,
        debugger=config.debugger.executable,
        debugger_flags=list(config.debugger.extra_flags),
    )
    print(render_validation(result))
    return EXIT_FIXED if isinstance(result, Fixed) else EXIT_UNFIXED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crashrepair",
        description="Repair crash-inducing C bugs with a debugger-guided LLM agent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    repair = sub.add_parser(
        "repair", help="reproduce the crash and run the full repair loop"
    )
    repair.add_argument("config", help="job file (JSON)")
    repair.add_argument(
        "--no-cfc",
        action="store_true",
        help="run without a crash-free constraint (ablation)",
    )
    repair.add_argument(
        "--dry-run",
        action="store_true",
        help="stop after triage and constraint derivation",
    )
    repair.add_argument(
        "--scripted",
        metavar="FILE",
        help="serve model turns from a script file instead of a live backend",
    )
    repair.set_defaults(func=cmd_repair)

    triage = sub.add_parser("triage", help="reproduce the crash and classify it")
    triage.add_argument("config", help="job file (JSON)")
    triage.set_defaults(func=cmd_triage)

    cfc = sub.add_parser("cfc", help="constraint utilities")
    cfc_sub = cfc.add_subparsers(dest="cfc_command", required=True)
    translate = cfc_sub.add_parser(
        "translate", help="print the simplified constraint and its English reading"
    )
    translate.add_argument("file", help="constraint file")
    translate.set_defaults(func=cmd_cfc_translate)

    validate = sub.add_parser(
        "validate", help="apply a stored patch and re-run the proof of concept"
    )
    validate.add_argument("config", help="job file (JSON)")
    validate.add_argument("patch", help="patch file (JSON edits)")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PatchFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _Fail as fail:
        print(f"error: {fail.message}", file=sys.stderr)
        return fail.code
    except GatewayError as exc:
        print(f"model backend failure: {exc}", file=sys.stderr)
        return EXIT_UNFIXED


if __name__ == "__main__":
    sys.exit(main())
