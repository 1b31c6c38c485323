"""Job configuration: one JSON file describes a whole repair run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .project import ProjectSpec


class ConfigError(Exception):
    """The job file is missing, malformed, or carries invalid values."""


@dataclass(frozen=True)
class LlmConfig:
    backend: str = "scripted"  # "scripted" or "openai"
    base_url: str = ""
    model: str = "scripted"
    temperature: float = 0.2


@dataclass(frozen=True)
class CapsConfig:
    max_debug_rounds: int = 16
    max_patch_attempts: int = 3
    max_debug_phases: int = 2


@dataclass(frozen=True)
class DebuggerConfig:
    executable: str = "gdb"
    extra_flags: tuple[str, ...] = ()


@dataclass
class JobConfig:
    project: ProjectSpec
    cfc_file: Optional[str] = None
    llm: LlmConfig = field(default_factory=LlmConfig)
    caps: CapsConfig = field(default_factory=CapsConfig)
    debugger: DebuggerConfig = field(default_factory=DebuggerConfig)
    output_dir: str = "runs"


_REQUIRED = object()


class _Section:
    """One mapping of the job file; every key must be consumed exactly once."""

    def __init__(self, name: str, mapping):
        if not isinstance(mapping, dict):
            raise ConfigError(f"{name} must be a JSON object")
        self.name = name
        self.mapping = dict(mapping)

    def _describe(self, key: str) -> str:
        return f"{self.name}.{key}" if self.name != "job" else key

    def take(self, key: str, kind: type, default=_REQUIRED):
        if key not in self.mapping:
            if default is _REQUIRED:
                raise ConfigError(f"missing required key: {self._describe(key)}")
            return default
        value = self.mapping.pop(key)
        if value is None and default is None:
            return None
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            raise ConfigError(
                f"{self._describe(key)} must be a {kind.__name__}, got {type(value).__name__}"
            )
        return value

    def take_section(self, key: str, required: bool = False) -> Optional["_Section"]:
        if key not in self.mapping:
            if required:
                raise ConfigError(f"missing required key: {self._describe(key)}")
            return None
        return _Section(self._describe(key), self.mapping.pop(key))

    def finish(self):
        if self.mapping:
            extras = ", ".join(sorted(self.mapping))
            raise ConfigError(f"unknown key(s) in {self.name}: {extras}")


def _str_mapping(name: str, value) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a JSON object")
    for key, item in value.items():
        if not isinstance(key, str) or not isinstance(item, str):
            raise ConfigError(f"{name} entries must map strings to strings")
    return dict(value)


def _str_list(name: str, value) -> list[str]:
    if not isinstance(value, list) or any(not isinstance(item, str) for item in value):
        raise ConfigError(f"{name} must be a list of strings")
    return list(value)


def _parse_project(section: _Section, config_dir: Path) -> ProjectSpec:
    root = section.take("root", str)
    build_cmd = section.take("build_cmd", str)
    run_cmd = section.take("run_cmd", str)
    poc = section.take("poc", str, default="")
    env = _str_mapping("project.env", section.take("env", dict, default={}))
    build_timeout_s = section.take("build_timeout_s", float, default=120.0)
    run_timeout_s = section.take("run_timeout_s", float, default=30.0)
    section.finish()
    # relative roots are resolved against the job file, not the caller's cwd
    root_path = Path(root)
    if not root_path.is_absolute():
        root_path = config_dir / root_path
    try:
        return ProjectSpec(
            root=str(root_path),
            build_cmd=build_cmd,
            run_cmd=run_cmd,
            poc=poc,
            env=env,
            build_timeout_s=build_timeout_s,
            run_timeout_s=run_timeout_s,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_llm(section: Optional[_Section]) -> LlmConfig:
    if section is None:
        return LlmConfig()
    backend = section.take("backend", str, default="scripted")
    base_url = section.take("base_url", str, default="")
    model = section.take("model", str, default="scripted")
    temperature = section.take("temperature", float, default=0.2)
    section.finish()
    if backend not in ("scripted", "openai"):
        raise ConfigError(f"llm.backend must be 'scripted' or 'openai', got {backend!r}")
    if backend == "openai" and not base_url:
        raise ConfigError("llm.base_url is required for the openai backend")
    if not 0.0 <= temperature <= 2.0:
        raise ConfigError("llm.temperature must be between 0 and 2")
    return LlmConfig(backend=backend, base_url=base_url, model=model, temperature=temperature)


def _parse_caps(section: Optional[_Section]) -> CapsConfig:
    if section is None:
        return CapsConfig()
    rounds = section.take("max_debug_rounds", int, default=16)
    attempts = section.take("max_patch_attempts", int, default=3)
    phases = section.take("max_debug_phases", int, default=2)
    section.finish()
    for label, value in (
        ("caps.max_debug_rounds", rounds),
        ("caps.max_patch_attempts", attempts),
        ("caps.max_debug_phases", phases),
    ):
        if value < 1:
            raise ConfigError(f"{label} must be positive")
    return CapsConfig(
        max_debug_rounds=rounds, max_patch_attempts=attempts, max_debug_phases=phases
    )


def _parse_debugger(section: Optional[_Section]) -> DebuggerConfig:
    if section is None:
        return DebuggerConfig()
    executable = section.take("executable", str, default="gdb")
    flags = _str_list("debugger.extra_flags", section.take("extra_flags", list, default=[]))
    section.finish()
    if not executable.strip():
        raise ConfigError("debugger.executable must be non-empty")
    return DebuggerConfig(executable=executable, extra_flags=tuple(flags))


def parse_config(data, config_dir: Path) -> JobConfig:
    """Validate a decoded job mapping; unknown keys are rejected everywhere."""
    job = _Section("job", data)
    project = _parse_project(job.take_section("project", required=True), config_dir)
    cfc_file = job.take("cfc_file", str, default=None)
    llm = _parse_llm(job.take_section("llm"))
    caps = _parse_caps(job.take_section("caps"))
    debugger = _parse_debugger(job.take_section("debugger"))
    output_dir = job.take("output_dir", str, default="runs")
    job.finish()
    if cfc_file is not None:
        cfc_path = Path(cfc_file)
        if not cfc_path.is_absolute():
            cfc_path = config_dir / cfc_path
        cfc_file = str(cfc_path)
    output_path = Path(output_dir)
    if not output_path.is_absolute():
        output_path = config_dir / output_path
    return JobConfig(
        project=project,
        cfc_file=cfc_file,
        llm=llm,
        caps=caps,
        debugger=debugger,
        output_dir=str(output_path),
    )


def load_config(path: str) -> JobConfig:
    """Read and validate a job file from disk."""
    config_path = Path(path)
    try:
        text = config_path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read job file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"job file is not valid JSON: {exc}") from exc
    return parse_config(data, config_path.resolve().parent)
