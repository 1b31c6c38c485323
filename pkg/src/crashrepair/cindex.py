"""Lightweight lexical indexer for C sources.

Serves the agent's static-information calls: numbered file slices,
definition lookup, symbol summaries with typedef chains and leading
comments, and whole function bodies. It is a comment/string-aware
scanner with a brace matcher, not a parser: top-level declarations are
recognized by shape, and over-approximation is acceptable because the
results are advisory context.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .location import SourceLocation

_C_KEYWORDS = {
    "auto", "break", "case", "char", "const", "continue", "default", "do",
    "double", "else", "enum", "extern", "float", "for", "goto", "if",
    "inline", "int", "long", "register", "restrict", "return", "short",
    "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
    "unsigned", "void", "volatile", "while",
}

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class PathEscapeError(Exception):
    pass


class MissingFileError(Exception):
    pass


class UnknownSymbolError(Exception):
    pass


class DeclarationOnlyError(Exception):
    pass


@dataclass
class SymbolEntry:
    kind: str  # function | typedef | macro | global
    name: str
    location: SourceLocation
    extent: tuple[int, int]  # inclusive 1-based line range
    signature: str
    comment: str = ""
    declaration_only: bool = False


@dataclass
class _FileRecord:
    digest: str
    lines: list[str]
    entries: list[SymbolEntry] = field(default_factory=list)


def mask_source(text: str) -> str:
    """Replace comment/string/char content with spaces, keeping layout."""
    out = list(text)
    i, n = 0, len(text)
    state = "code"
    while i < n:
        c = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if state == "code":
            if c == "/" and nxt == "/":
                state = "line_comment"
                out[i] = out[i + 1] = " "
                i += 2
                continue
            if c == "/" and nxt == "*":
                state = "block_comment"
                out[i] = out[i + 1] = " "
                i += 2
                continue
            if c == '"':
                state = "string"
                i += 1
                continue
            if c == "'":
                state = "char"
                i += 1
                continue
            i += 1
            continue
        if state == "line_comment":
            if c == "\n":
                state = "code"
            else:
                out[i] = " "
            i += 1
            continue
        if state == "block_comment":
            if c == "*" and nxt == "/":
                state = "code"
                out[i] = out[i + 1] = " "
                i += 2
                continue
            if c != "\n":
                out[i] = " "
            i += 1
            continue
        # string or char literal
        if c == "\\":
            out[i] = " "
            if i + 1 < n and text[i + 1] != "\n":
                out[i + 1] = " "
            i += 2
            continue
        if (state == "string" and c == '"') or (state == "char" and c == "'"):
            state = "code"
            i += 1
            continue
        if c != "\n":
            out[i] = " "
        i += 1
    return "".join(out)


def comment_line_flags(text: str) -> list[bool]:
    """Per line: does the line consist only of comment text/whitespace?"""
    masked = mask_source(text)
    flags = []
    for raw, masked_line in zip(text.split("\n"), masked.split("\n")):
        has_comment = raw != masked_line
        code_left = masked_line.strip()
        flags.append(has_comment and not code_left)
    return flags


class SourceIndex:
    """Index of one project tree; refreshed when file contents change."""

    def __init__(self, root, crash_file: Optional[str] = None):
        self.root = Path(root).resolve()
        self.crash_file = crash_file
        self._files: dict[str, _FileRecord] = {}
        self.refresh()

    # -- indexing ---------------------------------------------------------

    def source_files(self) -> list[str]:
        paths = []
        for pattern in ("*.c", "*.h"):
            paths.extend(self.root.rglob(pattern))
        return sorted(str(p.relative_to(self.root)) for p in paths if p.is_file())

    def refresh(self):
        seen = set()
        for rel in self.source_files():
            seen.add(rel)
            text = (self.root / rel).read_text(errors="replace")
            digest = hashlib.sha256(text.encode()).hexdigest()
            record = self._files.get(rel)
            if record is not None and record.digest == digest:
                continue
            record = _FileRecord(digest=digest, lines=text.split("\n"))
            record.entries = _scan_file(rel, text)
            self._files[rel] = record
        for rel in list(self._files):
            if rel not in seen:
                del self._files[rel]

    @property
    def symbols(self) -> dict[str, list[SymbolEntry]]:
        table: dict[str, list[SymbolEntry]] = {}
        for rel in sorted(self._files):
            for entry in self._files[rel].entries:
                table.setdefault(entry.name, []).append(entry)
        return table

    # -- tool operations --------------------------------------------------

    def resolve_path(self, path) -> Path:
        candidate = (self.root / path).resolve()
        if candidate != self.root and self.root not in candidate.parents:
            raise PathEscapeError(f"{path} is outside the project root")
        return candidate

    def get_file_content(self, path, start_line: int, end_line: int) -> str:
        target = self.resolve_path(path)
        if not target.is_file():
            raise MissingFileError(str(path))
        if start_line < 1 or end_line < start_line:
            raise ValueError("line range must satisfy 1 <= start <= end")
        lines = target.read_text(errors="replace").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        total = len(lines)
        clamped_start = min(start_line, total)
        clamped_end = min(end_line, total)
        notice = ""
        if (clamped_start, clamped_end) != (start_line, end_line):
            notice = (
                f"[requested lines {start_line}-{end_line} clamped to "
                f"{clamped_start}-{clamped_end}; file has {total} lines]\n"
            )
        body = "\n".join(
            f"{i}: {lines[i - 1]}" for i in range(clamped_start, clamped_end + 1)
        )
        return notice + body

    def definition(self, symbol: str) -> list[dict]:
        self.refresh()
        entries = self.symbols.get(symbol)
        if not entries:
            raise UnknownSymbolError(symbol)
        ranked = sorted(
            entries,
            key=lambda e: (
                0 if self.crash_file and e.location.file == self.crash_file else 1,
                e.declaration_only,
                e.location.file,
                e.location.line,
            ),
        )
        return [
            {
                "location": e.location,
                "kind": e.kind,
                "text": self._extent_text(e, numbered=False),
            }
            for e in ranked
        ]

    def summary(self, symbol: str) -> dict:
        self.refresh()
        entries = self.symbols.get(symbol)
        if not entries:
            raise UnknownSymbolError(symbol)
        entry = sorted(entries, key=lambda e: e.declaration_only)[0]
        chains = {}
        if entry.kind == "typedef":
            chains[entry.name] = self.typedef_chain(entry.name)
        for name in _IDENT.findall(entry.signature):
            if name != entry.name and self._typedef_entry(name) is not None:
                chains[name] = self.typedef_chain(name)
        return {
            "name": entry.name,
            "kind": entry.kind,
            "location": entry.location,
            "signature": entry.signature,
            "alias_chains": chains,
            "comment": entry.comment,
        }

    def function_body(self, name: str) -> dict:
        self.refresh()
        entries = [e for e in self.symbols.get(name, []) if e.kind == "function"]
        if not entries:
            raise UnknownSymbolError(name)
        definitions = [e for e in entries if not e.declaration_only]
        if not definitions:
            raise DeclarationOnlyError(name)
        entry = definitions[0]
        return {
            "file": entry.location.file,
            "start_line": entry.extent[0],
            "end_line": entry.extent[1],
            "text": self._extent_text(entry, numbered=True),
        }

    def typedef_chain(self, name: str) -> list[str]:
        chain = [name]
        seen = {name}
        current = name
        while True:
            entry = self._typedef_entry(current)
            if entry is None:
                break
            target = _typedef_target(entry.signature, current)
            if target is None:
                break
            chain.append(target)
            if not _IDENT.fullmatch(target) or target in seen:
                break
            seen.add(target)
            current = target
        return chain

    def _typedef_entry(self, name: str) -> Optional[SymbolEntry]:
        for entry in self.symbols.get(name, []):
            if entry.kind == "typedef":
                return entry
        return None

    def _extent_text(self, entry: SymbolEntry, numbered: bool) -> str:
        record = self._files[entry.location.file]
        start, end = entry.extent
        lines = record.lines[start - 1 : end]
        if numbered:
            return "\n".join(f"{start + i}: {line}" for i, line in enumerate(lines))
        return "\n".join(lines)


def _typedef_target(signature: str, name: str) -> Optional[str]:
    """The aliased type text: `typedef unsigned short uint16;` -> that text."""
    text = signature.strip().rstrip(";").strip()
    if not text.startswith("typedef"):
        return None
    body = text[len("typedef") :].strip()
    if "{" in body:
        return None
    # drop the introduced name from the tail, plus any array suffix
    body = re.sub(r"\[[^\]]*\]\s*$", "", body).strip()
    if body.endswith(name):
        body = body[: -len(name)].strip()
    return body or None


# -- file scanning ---------------------------------------------------------


def _scan_file(rel_path: str, text: str) -> list[SymbolEntry]:
    masked = mask_source(text)
    lines = text.split("\n")
    masked_lines = masked.split("\n")
    comment_flags = comment_line_flags(text)

    entries: list[SymbolEntry] = []
    structural: list[str] = []
    macro_entries, macro_line_set = _scan_preprocessor(rel_path, lines, masked_lines)
    entries.extend(macro_entries)
    for i, masked_line in enumerate(masked_lines):
        if i in macro_line_set:
            structural.append(" " * len(masked_line))
        else:
            structural.append(masked_line)
    entries.extend(_scan_statements(rel_path, structural))

    for entry in entries:
        entry.comment = _leading_comment(lines, comment_flags, entry.extent[0])
    return entries


def _scan_preprocessor(rel_path, lines, masked_lines):
    """Index #define names; report every preprocessor line for blanking."""
    entries = []
    pp_lines = set()
    i = 0
    define_re = re.compile(r"\s*#\s*define\s+([A-Za-z_][A-Za-z0-9_]*)")
    while i < len(lines):
        if masked_lines[i].lstrip().startswith("#"):
            start = i
            while i < len(lines) and lines[i].rstrip().endswith("\\"):
                pp_lines.add(i)
                i += 1
            pp_lines.add(i)
            block = "\n".join(lines[start : i + 1])
            m = define_re.match(masked_lines[start])
            if m:
                entries.append(
                    SymbolEntry(
                        kind="macro",
                        name=m.group(1),
                        location=SourceLocation(rel_path, start + 1),
                        extent=(start + 1, i + 1),
                        signature=block,
                    )
                )
        i += 1
    return entries, pp_lines


def _scan_statements(rel_path, structural_lines):
    """Walk depth-0 statements in the masked text and classify them."""
    text = "\n".join(structural_lines)
    entries = []
    depth = 0
    statement_start = 0
    i, n = 0, len(text)
    brace_open = None  # offset of the '{' that opened depth 1
    while i < n:
        c = text[i]
        if c == "{":
            if depth == 0:
                brace_open = i
            depth += 1
        elif c == "}":
            depth = max(0, depth - 1)
            if depth == 0:
                # either a function/struct body end or part of a declaration
                tail = _peek_semicolon(text, i + 1)
                if tail is None:
                    entry = _classify_braced(rel_path, text, statement_start, brace_open, i)
                    if entry is not None:
                        entries.append(entry)
                    statement_start = i + 1
                    brace_open = None
                # else: declaration continues to the ';'
        elif c == ";" and depth == 0:
            entry = _classify_simple(rel_path, text, statement_start, i, brace_open)
            if entry is not None:
                entries.append(entry)
            statement_start = i + 1
            brace_open = None
        i += 1
    return entries


def _peek_semicolon(text, pos):
    """Offset of a ';' following only whitespace/identifiers (a declarator
    tail after '}'), else None."""
    i = pos
    while i < len(text) and text[i] not in ";{}":
        if not (text[i].isspace() or text[i].isalnum() or text[i] in "_,*[]="):
            return None
        i += 1
    if i < len(text) and text[i] == ";":
        return i
    return None


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def _classify_braced(rel_path, text, start, brace_open, brace_close):
    """A depth-0 `{...}` block closed without a trailing ';': a function."""
    if brace_open is None:
        return None
    head = text[start:brace_open]
    name = None
    for cand in re.finditer(r"([A-Za-z_][A-Za-z0-9_]*)\s*\(", head):
        if cand.group(1) not in _C_KEYWORDS:
            name = cand.group(1)
            break
    if name is None:
        return None
    sig_start_line = _first_code_line(text, start, brace_open)
    end_line = _line_of(text, brace_close)
    signature = _squash(head)
    return SymbolEntry(
        kind="function",
        name=name,
        location=SourceLocation(rel_path, sig_start_line),
        extent=(sig_start_line, end_line),
        signature=signature,
    )


def _classify_simple(rel_path, text, start, semi, brace_open):
    """A depth-0 statement ending in ';': typedef, prototype, or global."""
    stmt = text[start:semi]
    if not stmt.strip():
        return None
    first_line = _first_code_line(text, start, semi)
    end_line = _line_of(text, semi)
    raw = _squash(stmt) + ";"
    tokens = _IDENT.findall(stmt if brace_open is None else text[start:brace_open])
    if not tokens:
        return None

    if tokens[0] == "typedef":
        if brace_open is not None:
            # typedef struct { ... } name;
            tail = text[text.rfind("}", start, semi) + 1 : semi]
            names = _IDENT.findall(re.sub(r"\[[^\]]*\]", "", tail))
        else:
            names = [t for t in _IDENT.findall(re.sub(r"\[[^\]]*\]", "", stmt)) if t not in _C_KEYWORDS]
        if not names:
            return None
        return SymbolEntry(
            kind="typedef",
            name=names[-1],
            location=SourceLocation(rel_path, first_line),
            extent=(first_line, end_line),
            signature=raw,
        )

    head = stmt if brace_open is None else text[start:brace_open]
    paren = head.find("(")
    if paren != -1 and brace_open is None:
        before = _IDENT.findall(head[:paren])
        name = next((t for t in reversed(before) if t not in _C_KEYWORDS), None)
        if name is not None and re.search(rf"\b{re.escape(name)}\s*\(\Z", head[: paren + 1]):
            return SymbolEntry(
                kind="function",
                name=name,
                location=SourceLocation(rel_path, first_line),
                extent=(first_line, end_line),
                signature=raw,
                declaration_only=True,
            )

    # global: declarator name is the last identifier before '=', '[' or ';'
    if brace_open is not None:
        head_text = text[start:brace_open]
        eq = head_text.find("=")
        if eq != -1:
            declarator = head_text[:eq]  # int g[2] = {...};
        else:
            # struct foo { ... } g; -- a bare type definition has no tail
            declarator = text[text.rfind("}", start, semi) + 1 : semi]
            if not declarator.strip():
                return None
    else:
        eq = stmt.find("=")
        declarator = stmt[:eq] if eq != -1 else stmt
    declarator = re.sub(r"\[[^\]]*\]", "", declarator)
    names = [t for t in _IDENT.findall(declarator) if t not in _C_KEYWORDS]
    if not names:
        return None
    return SymbolEntry(
        kind="global",
        name=names[-1],
        location=SourceLocation(rel_path, first_line),
        extent=(first_line, end_line),
        signature=raw,
    )


def _first_code_line(text, start, limit) -> int:
    """Line number of the first non-blank content in text[start:limit]."""
    segment = text[start:limit]
    stripped = segment.lstrip()
    if not stripped:
        return _line_of(text, start)
    return _line_of(text, start + len(segment) - len(stripped))


def _squash(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def _leading_comment(lines, comment_flags, start_line) -> str:
    """The contiguous comment block on the lines directly above."""
    end = start_line - 2  # index of the line above, 0-based
    if end < 0 or not comment_flags[end]:
        return ""
    begin = end
    while begin > 0 and comment_flags[begin - 1]:
        begin -= 1
    return "\n".join(lines[begin : end + 1])
