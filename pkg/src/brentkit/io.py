"""Reading and writing algorithms.

JSON::

    {"format": {"m": 2, "n": 2, "p": 2}, "length": 7,
     "terms": [{"u": [[1, 0], [0, 1]], "v": ..., "w": ...}, ...]}

Text: a header line ``m n p r`` followed by r terms; each term is an m-line
u block, an n-line v block and a p-line w block, blocks separated by blank
lines. Entries in both formats are integers or ``num/den``.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Union

from .exact import Algorithm, MatMulFormat, ShapeError, TriadTerm

_ENTRY = re.compile(r"^[+-]?\d+(/[+-]?\d+)?$")


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


def parse_entry(token, line: int | None = None, column: int | None = None) -> Fraction:
    if isinstance(token, bool):
        raise ParseError(f"invalid entry {token!r}", line, column)
    if isinstance(token, int):
        return Fraction(token)
    if not isinstance(token, str) or not _ENTRY.match(token.strip()):
        raise ParseError(f"invalid entry {token!r}", line, column)
    num, _, den = token.strip().partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator in {token!r}" + (f" at line {line}" if line else ""))
    return Fraction(int(num), int(den or 1))


def format_entry(x: Fraction) -> Union[int, str]:
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _entry_text(x: Fraction) -> str:
    return str(format_entry(x))


# -- JSON ---------------------------------------------------------------------


def algorithm_to_json(q: Algorithm) -> dict:
    m, n, p = q.format.as_tuple()
    return {
        "format": {"m": m, "n": n, "p": p},
        "length": q.r,
        "terms": [
            {role: [[format_entry(x) for x in row] for row in t.factor(role.upper()).entries] for role in "uvw"}
            for t in q.terms
        ],
    }


def serialize_json(q: Algorithm) -> str:
    return json.dumps(algorithm_to_json(q), separators=(",", ":")) + "\n"


def algorithm_from_json(data: dict) -> Algorithm:
    try:
        fmt = MatMulFormat(int(data["format"]["m"]), int(data["format"]["n"]), int(data["format"]["p"]))
        terms_in = data["terms"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field: {exc}") from None
    if "length" in data and data["length"] != len(terms_in):
        raise ShapeError(f"length {data['length']} but {len(terms_in)} terms present")
    terms = []
    for idx, t in enumerate(terms_in):
        mats = []
        for role in "uvw":
            rows, cols = fmt.role_shape(role.upper())
            block = t.get(role) if isinstance(t, dict) else None
            if not isinstance(block, list) or len(block) != rows or any(
                not isinstance(row, list) or len(row) != cols for row in block
            ):
                raise ShapeError(f"term {idx}: {role} must be {rows}x{cols}")
            mats.append([[parse_entry(x) for x in row] for row in block])
        terms.append(TriadTerm.of(*mats))
    return Algorithm(fmt, tuple(terms))


# -- text -----------------------------------------------------------------------


def serialize_text(q: Algorithm) -> str:
    m, n, p = q.format.as_tuple()
    out = [f"{m} {n} {p} {q.r}"]
    for t in q.terms:
        for role in "UVW":
            out.append("")
            out.extend(" ".join(_entry_text(x) for x in row) for row in t.factor(role).entries)
    return "\n".join(out) + "\n"


def parse_text(text: str) -> Algorithm:
    lines = text.splitlines()
    groups: list[list[tuple[int, str]]] = []
    current: list[tuple[int, str]] = []
    for lineno, raw in enumerate(lines, start=1):
        if raw.strip():
            current.append((lineno, raw))
        elif current:
            groups.append(current)
            current = []
    if current:
        groups.append(current)
    if not groups:
        raise ParseError("empty input", 1)

    header_line, header = groups[0][0]
    try:
        m, n, p, r = (int(x) for x in header.split())
    except ValueError:
        raise ParseError(f"header must be 'm n p r', got {header.strip()!r}", header_line, 1) from None
    fmt = MatMulFormat(m, n, p)
    if r < 1:
        raise ParseError("r must be positive", header_line)
    # the header may share a group with the first block when no blank line follows it
    blocks = [groups[0][1:]] + groups[1:] if len(groups[0]) > 1 else groups[1:]
    if len(blocks) != 3 * r:
        raise ShapeError(f"expected {3 * r} matrix blocks for r={r}, found {len(blocks)}")

    mats = []
    for b, block in enumerate(blocks):
        role = "UVW"[b % 3]
        rows, cols = fmt.role_shape(role)
        if len(block) != rows:
            raise ShapeError(
                f"line {block[0][0]}: term {b // 3} {role} block has {len(block)} rows, expected {rows}"
            )
        mat = []
        for lineno, raw in block:
            tokens = list(re.finditer(r"\S+", raw))
            if len(tokens) != cols:
                raise ShapeError(f"line {lineno}: {role} row has {len(tokens)} entries, expected {cols}")
            mat.append([parse_entry(t.group(), lineno, t.start() + 1) for t in tokens])
        mats.append(mat)
    terms = [TriadTerm.of(*mats[3 * i : 3 * i + 3]) for i in range(r)]
    return Algorithm(fmt, tuple(terms))


# -- dispatch -------------------------------------------------------------------


def _guess_format(path: Path | None, text: str) -> str:
    if path is not None and path.suffix.lower() == ".json":
        return "json"
    if path is not None and path.suffix.lower() in (".txt", ".alg"):
        return "text"
    return "json" if text.lstrip().startswith("{") else "text"


def parse_algorithm(source: Union[str, Path, bytes], format_hint: str | None = None) -> Algorithm:
    """Parse a path, or raw bytes, in the json or text format."""
    path = None
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        path = Path(source)
        text = path.read_text(encoding="utf-8")
    fmt = format_hint or _guess_format(path, text)
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return algorithm_from_json(data)
    if fmt == "text":
        return parse_text(text)
    raise ValueError(f"unknown format hint {fmt!r}")


def write_algorithm(q: Algorithm, path: Union[str, Path], format_hint: str | None = None) -> None:
    path = Path(path)
    fmt = format_hint or ("text" if path.suffix.lower() in (".txt", ".alg") else "json")
    path.write_text(serialize_text(q) if fmt == "text" else serialize_json(q), encoding="utf-8")
