"""Shared source-position value type."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int

    def __str__(self):
        return f"{self.file}:{self.line}"
