"""Machine-interface line protocol: parsing and quoting.

Implements the record grammar spoken by gdb-style MI interpreters:
result records (`^done`, `^error`, ...), async records (`*stopped`,
`=thread-created`, `+download`), and stream records (`~`, `@`, `&`),
each optionally prefixed with a numeric token. Values are c-strings,
tuples `{...}`, or lists `[...]`, parsed recursively.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class MiParseError(Exception):
    pass


@dataclass
class ResultRecord:
    klass: str  # done | running | connected | error | exit
    results: dict
    token: str | None = None


@dataclass
class AsyncRecord:
    kind: str  # exec | status | notify
    klass: str  # stopped, running, thread-created, ...
    results: dict
    token: str | None = None


@dataclass
class StreamRecord:
    kind: str  # console | target | log
    text: str


PROMPT = "(gdb)"

_ASYNC_KINDS = {"*": "exec", "+": "status", "=": "notify"}
_STREAM_KINDS = {"~": "console", "@": "target", "&": "log"}

_NAME_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_-]*")

_ESCAPES = {
    "n": "\n",
    "t": "\t",
    "r": "\r",
    "v": "\v",
    "f": "\f",
    "b": "\b",
    "a": "\a",
    '"': '"',
    "\\": "\\",
    "'": "'",
}


def parse_mi_line(line: str):
    """Parse one MI output line; the prompt line yields None."""
    line = line.rstrip("\r\n")
    if not line:
        return None
    if line.strip() == PROMPT:
        return None

    token = None
    i = 0
    while i < len(line) and line[i].isdigit():
        i += 1
    if i > 0 and i < len(line) and line[i] in "^*+=":
        token = line[:i]
        line = line[i:]

    lead = line[0]
    if lead == "^":
        klass, results = _parse_record_body(line[1:])
        return ResultRecord(klass=klass, results=results, token=token)
    if lead in _ASYNC_KINDS:
        klass, results = _parse_record_body(line[1:])
        return AsyncRecord(kind=_ASYNC_KINDS[lead], klass=klass, results=results, token=token)
    if lead in _STREAM_KINDS:
        text, _ = _parse_c_string(line, 1)
        return StreamRecord(kind=_STREAM_KINDS[lead], text=text)
    raise MiParseError(f"unrecognized record: {line!r}")


def _parse_record_body(body: str) -> tuple[str, dict]:
    m = _NAME_RE.match(body)
    if m is None:
        raise MiParseError(f"missing record class in {body!r}")
    klass = m.group()
    results: dict = {}
    pos = m.end()
    while pos < len(body):
        if body[pos] != ",":
            raise MiParseError(f"expected ',' at {pos} in {body!r}")
        name, value, pos = _parse_result(body, pos + 1)
        results[name] = value
    return klass, results


def _parse_result(text: str, pos: int) -> tuple[str, object, int]:
    m = _NAME_RE.match(text, pos)
    if m is None:
        raise MiParseError(f"expected result name at {pos} in {text!r}")
    name = m.group()
    pos = m.end()
    if pos >= len(text) or text[pos] != "=":
        raise MiParseError(f"expected '=' at {pos} in {text!r}")
    value, pos = _parse_value(text, pos + 1)
    return name, value, pos


def _parse_value(text: str, pos: int) -> tuple[object, int]:
    if pos >= len(text):
        raise MiParseError(f"expected value at {pos} in {text!r}")
    c = text[pos]
    if c == '"':
        return _parse_c_string(text, pos)
    if c == "{":
        return _parse_tuple(text, pos)
    if c == "[":
        return _parse_list(text, pos)
    raise MiParseError(f"expected value at {pos} in {text!r}")


def _parse_c_string(text: str, pos: int) -> tuple[str, int]:
    if text[pos] != '"':
        raise MiParseError(f"expected '\"' at {pos} in {text!r}")
    out = []
    i = pos + 1
    while i < len(text):
        c = text[i]
        if c == '"':
            return "".join(out), i + 1
        if c == "\\":
            if i + 1 >= len(text):
                break
            nxt = text[i + 1]
            if nxt in _ESCAPES:
                out.append(_ESCAPES[nxt])
                i += 2
                continue
            if nxt.isdigit():
                digits = text[i + 1 : i + 4]
                octal = re.match(r"[0-7]{1,3}", digits)
                if octal:
                    out.append(chr(int(octal.group(), 8)))
                    i += 1 + len(octal.group())
                    continue
            out.append(nxt)
            i += 2
            continue
        out.append(c)
        i += 1
    raise MiParseError(f"unterminated string starting at {pos} in {text!r}")


def _parse_tuple(text: str, pos: int) -> tuple[dict, int]:
    results: dict = {}
    i = pos + 1
    if i < len(text) and text[i] == "}":
        return results, i + 1
    while True:
        name, value, i = _parse_result(text, i)
        results[name] = value
        if i >= len(text):
            raise MiParseError(f"unterminated tuple at {pos} in {text!r}")
        if text[i] == "}":
            return results, i + 1
        if text[i] != ",":
            raise MiParseError(f"expected ',' or '}}' at {i} in {text!r}")
        i += 1


def _parse_list(text: str, pos: int) -> tuple[list, int]:
    values: list = []
    i = pos + 1
    if i < len(text) and text[i] == "]":
        return values, i + 1
    while True:
        if text[i] in '"{[':
            value, i = _parse_value(text, i)
        else:
            # list elements may be name=value pairs; keep the values
            _, value, i = _parse_result(text, i)
        values.append(value)
        if i >= len(text):
            raise MiParseError(f"unterminated list at {pos} in {text!r}")
        if text[i] == "]":
            return values, i + 1
        if text[i] != ",":
            raise MiParseError(f"expected ',' or ']' at {i} in {text!r}")
        i += 1


def mi_quote(text: str) -> str:
    """Quote an argument as an MI c-string."""
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    escaped = escaped.replace("\n", "\\n").replace("\t", "\\t")
    return f'"{escaped}"'
