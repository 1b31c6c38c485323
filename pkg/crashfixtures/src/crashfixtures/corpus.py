"""Corpus plumbing: load case manifests, stage and build cases, verify them.

Each case directory holds src/, poc/, build.sh, manifest.json, cfc.cfc,
and fix.patch.json. Cases are staged into scratch directories before
building, so the checked-in corpus never changes under test.
"""

from __future__ import annotations

import json
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from crashrepair.cfc import CfcDocument, CfcParseError, ConditionParseError, load_cfc_text
from crashrepair.debugger import DebugSession, DebuggerError, OptimizedOut, StopInfo
from crashrepair.patching import (
    Fixed,
    Patch,
    PatchFormatError,
    attempt_patches,
    patches_from_json,
    render_validation,
)
from crashrepair.project import ProjectSpec, build_project
from crashrepair.triage import run_poc

CASES_ROOT = Path(__file__).resolve().parent / "cases"

# files that stay with the corpus; the staged project tree gets only
# src/, poc/, and build.sh
_METADATA = ("manifest.json", "cfc.cfc", "fix.patch.json")


class CorpusError(Exception):
    """A case directory or its manifest is malformed."""


@dataclass(frozen=True)
class ExpectedCrash:
    crash_class: str
    file: str
    line: int
    min_frames: int = 1


@dataclass(frozen=True)
class OptimizedOutProbe:
    """A stop at which a named local must report as optimized out."""

    poc: str
    file: str
    line: int
    variable: str


@dataclass(frozen=True)
class FixtureManifest:
    name: str
    sources: tuple[str, ...]
    build_cmd: str
    run_cmd: str
    poc: str
    template_class: str
    expected: ExpectedCrash
    cfc_file: str = "cfc.cfc"
    fix_file: str = "fix.patch.json"
    probe: Optional[OptimizedOutProbe] = None


def fixture_names() -> list[str]:
    return sorted(
        p.name for p in CASES_ROOT.iterdir() if (p / "manifest.json").is_file()
    )


def fixture_dir(name: str) -> Path:
    case = CASES_ROOT / name
    if not (case / "manifest.json").is_file():
        raise CorpusError(f"no such case: {name}")
    return case


def _take(mapping: dict, key: str, kind: type, context: str):
    if key not in mapping:
        raise CorpusError(f"{context}: missing key {key}")
    value = mapping.pop(key)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise CorpusError(f"{context}: {key} must be a {kind.__name__}")
    return value


def load_manifest(name: str) -> FixtureManifest:
    case = fixture_dir(name)
    context = f"{name}/manifest.json"
    try:
        data = json.loads((case / "manifest.json").read_text())
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{context}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CorpusError(f"{context}: not an object")

    sources = data.pop("sources", None)
    if not isinstance(sources, list) or not sources:
        raise CorpusError(f"{context}: sources must be a non-empty list")

    expected_raw = data.pop("expected", None)
    if not isinstance(expected_raw, dict):
        raise CorpusError(f"{context}: expected must be an object")
    expected = ExpectedCrash(
        crash_class=_take(expected_raw, "crash_class", str, context),
        file=_take(expected_raw, "file", str, context),
        line=_take(expected_raw, "line", int, context),
        min_frames=expected_raw.pop("min_frames", 1),
    )
    if expected_raw:
        raise CorpusError(f"{context}: unknown expected key(s): {sorted(expected_raw)}")

    probe = None
    probe_raw = data.pop("optimized_out_probe", None)
    if probe_raw is not None:
        if not isinstance(probe_raw, dict):
            raise CorpusError(f"{context}: optimized_out_probe must be an object")
        probe = OptimizedOutProbe(
            poc=_take(probe_raw, "poc", str, context),
            file=_take(probe_raw, "file", str, context),
            line=_take(probe_raw, "line", int, context),
            variable=_take(probe_raw, "variable", str, context),
        )
        if probe_raw:
            raise CorpusError(f"{context}: unknown probe key(s): {sorted(probe_raw)}")

    manifest = FixtureManifest(
        name=_take(data, "name", str, context),
        sources=tuple(sources),
        build_cmd=_take(data, "build_cmd", str, context),
        run_cmd=_take(data, "run_cmd", str, context),
        poc=_take(data, "poc", str, context),
        template_class=_take(data, "template_class", str, context),
        expected=expected,
        cfc_file=data.pop("cfc_file", "cfc.cfc"),
        fix_file=data.pop("fix_file", "fix.patch.json"),
        probe=probe,
    )
    if data:
        raise CorpusError(f"{context}: unknown key(s): {sorted(data)}")
    if manifest.name != name:
        raise CorpusError(f"{context}: name field {manifest.name!r} does not match the directory")
    return manifest


def load_constraint(name: str) -> CfcDocument:
    manifest = load_manifest(name)
    path = fixture_dir(name) / manifest.cfc_file
    try:
        return load_cfc_text(path.read_text())
    except (CfcParseError, ConditionParseError) as exc:
        raise CorpusError(f"{name}: bad constraint file: {exc}") from exc


def reference_patches(name: str) -> list[Patch]:
    manifest = load_manifest(name)
    path = fixture_dir(name) / manifest.fix_file
    try:
        return patches_from_json(json.loads(path.read_text()))
    except (json.JSONDecodeError, PatchFormatError) as exc:
        raise CorpusError(f"{name}: bad reference fix: {exc}") from exc


def stage_fixture(name: str, dest) -> ProjectSpec:
    """Copy a case into dest and describe it as a buildable project."""
    manifest = load_manifest(name)
    case = fixture_dir(name)
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    for entry in case.iterdir():
        if entry.name in _METADATA:
            continue
        target = dest / entry.name
        if entry.is_dir():
            shutil.copytree(entry, target, dirs_exist_ok=True)
        else:
            shutil.copy2(entry, target)
    script = dest / "build.sh"
    if script.is_file():
        script.chmod(script.stat().st_mode | 0o755)
    return ProjectSpec(
        root=str(dest),
        build_cmd=manifest.build_cmd,
        run_cmd=manifest.run_cmd,
        poc=manifest.poc,
    )


def build_fixture(name: str, dest: Optional[str] = None) -> Path:
    """Stage and build a case; returns the path of the built binary."""
    staging = Path(dest) if dest else Path(tempfile.mkdtemp(prefix=f"case-{name}-"))
    project = stage_fixture(name, staging)
    result = build_project(project)
    if not result.ok:
        raise CorpusError(f"{name} does not build:\n{result.log}")
    binary = project.binary_path()
    if not binary.is_file():
        raise CorpusError(f"{name}: build succeeded but {binary} is missing")
    return binary


@dataclass
class ManifestCheck:
    name: str
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def check_manifest(name: str, dest: Optional[str] = None, debugger: str = "gdb") -> ManifestCheck:
    """Build the case, run its POC, and compare against the manifest.

    Also validates the reference fix (must yield a non-crashing program)
    and, when the manifest carries a probe, that the named local reports
    as optimized out at the probe stop.
    """
    check = ManifestCheck(name)
    manifest = load_manifest(name)
    staging = Path(dest) if dest else Path(tempfile.mkdtemp(prefix=f"case-{name}-"))
    project = stage_fixture(name, staging)

    result = build_project(project)
    if not result.ok:
        check.problems.append(f"build failed:\n{result.log}")
        return check

    report = run_poc(project, debugger=debugger)
    if not report.crashed:
        check.problems.append("the poc did not crash")
    else:
        got = report.crash_class.value if report.crash_class else "unknown"
        if got != manifest.expected.crash_class:
            check.problems.append(
                f"crash class {got}, manifest says {manifest.expected.crash_class}"
            )
        if report.location is None:
            check.problems.append("the report carries no crash location")
        elif (report.location.file, report.location.line) != (
            manifest.expected.file,
            manifest.expected.line,
        ):
            check.problems.append(
                f"crash at {report.location}, manifest says "
                f"{manifest.expected.file}:{manifest.expected.line}"
            )
        if len(report.backtrace) < manifest.expected.min_frames:
            check.problems.append(
                f"backtrace has {len(report.backtrace)} frames, "
                f"manifest requires at least {manifest.expected.min_frames}"
            )

    try:
        load_constraint(name)
    except CorpusError as exc:
        check.problems.append(str(exc))

    try:
        patches = reference_patches(name)
    except CorpusError as exc:
        check.problems.append(str(exc))
    else:
        outcome, _ = attempt_patches(project, patches, debugger=debugger)
        if not isinstance(outcome, Fixed):
            check.problems.append(f"reference fix rejected: {render_validation(outcome)}")

    if manifest.probe is not None:
        check.problems.extend(_run_probe(project, manifest.probe, debugger))
    return check


def _run_probe(project: ProjectSpec, probe: OptimizedOutProbe, debugger: str) -> list[str]:
    session = DebugSession(project, poc=probe.poc, debugger=debugger)
    try:
        outcome = session.run_to_line(probe.file, probe.line)
        if not isinstance(outcome, StopInfo):
            return [f"probe did not stop at {probe.file}:{probe.line}: {outcome!r}"]
        value = session.print_value(probe.variable)
        if not isinstance(value, OptimizedOut):
            return [f"probe variable {probe.variable} was not optimized out: {value!r}"]
        return []
    except DebuggerError as exc:
        return [f"probe failed: {exc}"]
    finally:
        session.kill()
