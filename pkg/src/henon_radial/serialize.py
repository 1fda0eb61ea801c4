"""Deterministic JSON and CSV emission.

Floats are rendered with 17 significant digits ('%.17g'), which round-trips
every double exactly, so repeated runs and load/save cycles are
byte-identical. Non-finite floats are rendered as null (JSON) or 'nan'/'inf'
(CSV) and should not appear in contract outputs.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable

import numpy as np

SCHEMA_VERSION = "1"


def fmt_float(x: float) -> str:
    """17-significant-digit rendering; exact double round-trip."""
    return format(float(x), ".17g")


def _render(obj: Any, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        parts.append(fmt_float(x) if math.isfinite(x) else "null")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                parts.append(",")
            parts.append(json.dumps(str(k)))
            parts.append(":")
            _render(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, v in enumerate(seq):
            if i:
                parts.append(",")
            _render(v, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON text (insertion-ordered keys, 17g floats, no spaces)."""
    parts: list[str] = []
    _render(obj, parts)
    return "".join(parts)


def loads(text: str) -> Any:
    return json.loads(text)


def csv_lines(header: Iterable[str], columns: Iterable[np.ndarray],
              comments: Iterable[str] = ()) -> str:
    """Render aligned columns as CSV; optional leading '#' comment lines."""
    cols = [np.asarray(c) for c in columns]
    out = [f"# {c}" for c in comments]
    out.append(",".join(header))
    for row in zip(*cols):
        out.append(",".join(fmt_float(v) for v in row))
    return "\n".join(out) + "\n"


def parse_csv(text: str) -> tuple[list[str], dict[str, np.ndarray], dict[str, str]]:
    """Parse CSV produced by csv_lines: (header, columns, comment key=value pairs)."""
    header: list[str] = []
    rows: list[list[float]] = []
    meta: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        if not header:
            header = [h.strip() for h in line.split(",")]
            continue
        rows.append([float(v) for v in line.split(",")])
    if not header or not rows:
        raise ValueError("CSV file has no data rows")
    arr = np.asarray(rows, dtype=float)
    return header, {h: arr[:, i] for i, h in enumerate(header)}, meta
