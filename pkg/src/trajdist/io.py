"""Reading and writing point sequences as CSV or JSON."""
from __future__ import annotations

import enum
import json
import math
from pathlib import Path

import numpy as np

from .errors import DimensionError, ParseError

__all__ = ["Format", "RaggedRowError", "parse_trajectory", "write_trajectory", "format_for"]


class Format(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


class RaggedRowError(ParseError, DimensionError):
    """A row whose arity differs from the first row."""


def format_for(path, fmt=None) -> Format:
    if fmt is not None:
        return Format(str(fmt).lower())
    return Format.JSON if str(path).lower().endswith(".json") else Format.CSV


def _number(tok: str, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok.strip()!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite coordinate {tok.strip()!r}", line)
    return v


def _parse_csv(text: str) -> np.ndarray:
    rows = []
    d = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        row = [_number(tok, lineno) for tok in s.split(",")]
        if d is None:
            d = len(row)
        elif len(row) != d:
            raise RaggedRowError(f"expected {d} coordinates, found {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise ParseError("no points")
    return np.array(rows, dtype=np.float64)


def _parse_json(text: str) -> np.ndarray:
    try:
        doc = json.loads(text, parse_constant=lambda c: float("nan"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(doc, dict) or "points" not in doc:
        raise ParseError('expected an object with "d" and "points"')
    pts = doc["points"]
    if not isinstance(pts, list) or not pts:
        raise ParseError('"points" must be a nonempty list')
    d = doc.get("d")
    if d is None:
        d = len(pts[0]) if isinstance(pts[0], list) else None
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParseError('"d" must be a positive integer')
    out = np.empty((len(pts), d), dtype=np.float64)
    for k, p in enumerate(pts):
        if not isinstance(p, list):
            raise ParseError(f"point {k} is not a list")
        if len(p) != d:
            raise RaggedRowError(f"point {k} has {len(p)} coordinates, expected {d}")
        for c, v in enumerate(p):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"point {k}, coordinate {c}: not a number")
            if not math.isfinite(v):
                raise ParseError(f"point {k}, coordinate {c}: non-finite value")
            out[k, c] = v
    return out


def parse_trajectory(path, fmt=None) -> np.ndarray:
    """Read a point sequence; the format is taken from the extension unless given."""
    fmt = format_for(path, fmt)
    text = Path(path).read_text()
    return _parse_csv(text) if fmt is Format.CSV else _parse_json(text)


def write_trajectory(path, points, fmt=None) -> None:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionError("expected an (n, d) array")
    fmt = format_for(path, fmt)
    if fmt is Format.CSV:
        text = "".join(",".join(repr(float(v)) for v in row) + "\n" for row in pts)
    else:
        text = json.dumps({"d": int(pts.shape[1]), "points": pts.tolist()}) + "\n"
    Path(path).write_text(text)
