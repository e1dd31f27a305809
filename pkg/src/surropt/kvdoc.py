"""A small self-describing key-value text format.

Used for experiment configurations, fitted-model descriptors, and prior
descriptors.  A document is a nested mapping whose leaves are strings,
bools, ints, floats, or flat lists of those.  The text form is one
``dotted.key = value`` line per leaf; canonical serialization sorts keys, so
documents diff cleanly and hash stably.

Values are unambiguous on their own: strings are always double-quoted,
bools are ``true``/``false``, floats always carry a decimal point or
exponent, and lists use ``[a, b, c]``.  Floats are written with 17
significant digits and round-trip exactly.
"""

from __future__ import annotations

import re
from typing import Any

import numpy as np

_KEY_RE = re.compile(r"^[A-Za-z0-9_-]+$")

Document = dict[str, Any]


def _format_float(x: float) -> str:
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.17g}"
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def _format_scalar(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _format_float(float(v))
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"unsupported scalar type {type(v).__name__}")


def _parse_scalar(tok: str) -> Any:
    tok = tok.strip()
    if tok.startswith('"'):
        if not tok.endswith('"') or len(tok) < 2:
            raise ValueError(f"unterminated string: {tok}")
        body = tok[1:-1]
        return body.replace('\\"', '"').replace("\\\\", "\\")
    if tok == "true":
        return True
    if tok == "false":
        return False
    if tok in ("nan", "inf", "-inf"):
        return float(tok)
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        raise ValueError(f"cannot parse value: {tok!r}")


def _split_list(body: str) -> list[str]:
    items, depth, cur, in_str = [], 0, [], False
    for ch in body:
        if in_str:
            cur.append(ch)
            if ch == '"' and (len(cur) < 2 or cur[-2] != "\\"):
                in_str = False
        elif ch == '"':
            cur.append(ch)
            in_str = True
        elif ch == "," and depth == 0:
            items.append("".join(cur))
            cur = []
        else:
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth -= 1
            cur.append(ch)
    tail = "".join(cur).strip()
    if tail:
        items.append(tail)
    return items


def _flatten(doc: Document, prefix: str = "") -> list[tuple[str, Any]]:
    out = []
    for key, value in doc.items():
        if not _KEY_RE.match(str(key)):
            raise ValueError(f"invalid key segment: {key!r}")
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            out.extend(_flatten(value, prefix=full + "."))
        else:
            out.append((full, value))
    return out


def serialize(doc: Document) -> str:
    """Render a document in canonical (key-sorted) text form."""
    lines = []
    for key, value in sorted(_flatten(doc)):
        if isinstance(value, (list, tuple, np.ndarray)):
            body = ", ".join(_format_scalar(v) for v in value)
            lines.append(f"{key} = [{body}]")
        else:
            lines.append(f"{key} = {_format_scalar(value)}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse(text: str) -> Document:
    """Parse key-value text into a nested document."""
    doc: Document = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if rhs.startswith("[") and rhs.endswith("]"):
            value: Any = [_parse_scalar(t) for t in _split_list(rhs[1:-1])]
        else:
            value = _parse_scalar(rhs)
        set_path(doc, key, value)
    return doc


def set_path(doc: Document, dotted: str, value: Any) -> None:
    """Assign ``value`` at a dotted key path, creating nested dicts."""
    parts = dotted.split(".")
    for part in parts:
        if not _KEY_RE.match(part):
            raise ValueError(f"invalid key segment {part!r} in {dotted!r}")
    node = doc
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ValueError(f"key path {dotted!r} collides with a leaf")
    node[parts[-1]] = value


def get_path(doc: Document, dotted: str, default: Any = None) -> Any:
    node: Any = doc
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def pack_matrix(arr: np.ndarray) -> Document:
    """Encode a 2-D array as row-indexed list leaves."""
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    return {f"row{i:04d}": [float(v) for v in row] for i, row in enumerate(arr)}


def unpack_matrix(doc: Document) -> np.ndarray:
    rows = [doc[k] for k in sorted(doc)]
    return np.asarray(rows, dtype=float)
