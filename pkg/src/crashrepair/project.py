"""Project description and build execution."""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

POC_PLACEHOLDER = "{poc}"


@dataclass
class ProjectSpec:
    root: str
    build_cmd: str
    run_cmd: str  # may contain {poc}, replaced by the poc path
    poc: str = ""
    env: dict = field(default_factory=dict)
    build_timeout_s: float = 120.0
    run_timeout_s: float = 30.0

    def __post_init__(self):
        if not self.build_cmd.strip() or not self.run_cmd.strip():
            raise ValueError("build_cmd and run_cmd must be non-empty")
        if self.build_timeout_s <= 0 or self.run_timeout_s <= 0:
            raise ValueError("timeouts must be positive")

    def run_argv(self, root: Optional[str] = None) -> list[str]:
        """The concrete argv: {poc} replaced, paths left project-relative."""
        command = self.run_cmd
        if POC_PLACEHOLDER in command:
            command = command.replace(POC_PLACEHOLDER, self.poc)
        argv = shlex.split(command)
        if not argv:
            raise ValueError("run_cmd is empty after substitution")
        return argv

    def binary_path(self, root: Optional[str] = None) -> Path:
        base = Path(root if root is not None else self.root)
        return (base / self.run_argv()[0]).resolve()


@dataclass
class BuildResult:
    ok: bool
    log: str
    timed_out: bool = False


def build_project(project: ProjectSpec, root: Optional[str] = None) -> BuildResult:
    """Run the project's build command with its timeout."""
    cwd = root if root is not None else project.root
    try:
        proc = subprocess.run(
            project.build_cmd,
            shell=True,
            cwd=cwd,
            capture_output=True,
            text=True,
            timeout=project.build_timeout_s,
        )
    except subprocess.TimeoutExpired:
        return BuildResult(ok=False, log="build timed out", timed_out=True)
    log = (proc.stdout or "") + (proc.stderr or "")
    return BuildResult(ok=proc.returncode == 0, log=log)
